#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace folio {

/// Tolerance on the simplex sum for a valid WeightVector.
inline constexpr double kSimplexTolerance = 1e-9;
/// Actions farther than this from the simplex are rejected rather than renormalized.
inline constexpr double kActionRenormTolerance = 1e-6;

/// Portfolio composition over cash (index 0) and n risky assets.
///
/// Construction validates 0 <= w_i <= 1 and |sum - 1| <= kSimplexTolerance; anything
/// else throws Error{InvalidAction}.
class WeightVector {
public:
    explicit WeightVector(std::vector<double> weights);

    /// [1, 0, ..., 0]: everything held as cash.
    static WeightVector all_cash(std::size_t n_assets);
    static WeightVector uniform(std::size_t n_assets);
    /// Uniform over the risky assets, no cash.
    static WeightVector equal_risky(std::size_t n_assets);

    /// Accepts a raw action that is within kActionRenormTolerance of the simplex:
    /// negatives down to -1e-9 are clamped to zero and the vector is divided by its sum.
    static WeightVector from_action(std::span<const double> raw);

    std::size_t size() const noexcept { return w_.size(); }
    std::size_t n_assets() const noexcept { return w_.size() - 1; }
    double operator[](std::size_t i) const { return w_[i]; }
    std::span<const double> values() const noexcept { return w_; }

    bool operator==(const WeightVector&) const = default;

private:
    std::vector<double> w_;
};

/// Price relatives y_t = P_t / P_{t-1} with the cash entry fixed at 1.
struct RelativeVector {
    std::vector<double> y;

    std::size_t size() const noexcept { return y.size(); }
    double operator[](std::size_t i) const { return y[i]; }
    bool operator==(const RelativeVector&) const = default;
};

}  // namespace folio
