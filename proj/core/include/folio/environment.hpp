#pragma once

#include <optional>
#include <span>

#include "folio/market_data.hpp"
#include "folio/normalization.hpp"
#include "folio/transaction_cost.hpp"
#include "folio/types.hpp"

namespace folio {

/// Window ending at T, normalized by `scheme`. For data_max the frame must already
/// be scaled (see apply_data_max) and no further transformation happens here.
StateTensor build_state(const MarketFrame& frame, std::size_t step, std::size_t window,
                        const NormalizationScheme& scheme);

/// (y ⊙ w) / (y · w)
WeightVector drift_weights(const WeightVector& w, const RelativeVector& y);
/// V * (w · y)
double drift_value(double value, const WeightVector& w, const RelativeVector& y);

/// Read-only simulation context: raw prices drive the portfolio arithmetic, while
/// states are built from `features()` (the data_max-scaled copy when that scheme is
/// active, otherwise the raw prices themselves). Never mutated after construction,
/// so any number of rollouts may share one instance.
class Market {
public:
    Market(MarketFrame prices, NormalizationScheme scheme, std::size_t window,
           double commission, double initial_value);

    const MarketFrame& prices() const noexcept { return prices_; }
    const MarketFrame& features() const noexcept { return features_ ? *features_ : prices_; }
    const NormalizationScheme& scheme() const noexcept { return scheme_; }
    std::size_t window() const noexcept { return window_; }
    double commission() const noexcept { return commission_; }
    double initial_value() const noexcept { return initial_value_; }
    std::size_t n_assets() const noexcept { return prices_.n_assets(); }

    /// First step at which a full window exists (window - 1).
    std::size_t first_step() const noexcept { return window_ - 1; }
    /// Number of decisions in one episode: steps first_step() .. L - 2.
    std::size_t decision_count() const noexcept { return prices_.length() - window_; }

    StateTensor state_at(std::size_t step) const;
    /// Relatives for the transition step -> step + 1.
    RelativeVector relative_after(std::size_t step) const;

private:
    MarketFrame prices_;
    std::optional<MarketFrame> features_;
    NormalizationScheme scheme_;
    std::size_t window_;
    double commission_;
    double initial_value_;
};

struct EnvState {
    std::size_t step = 0;
    /// Last rebalanced composition W_t (the previous action; all cash at reset).
    WeightVector weights = WeightVector::all_cash(0);
    /// Composition after prices moved, W_t^f.
    WeightVector drifted = WeightVector::all_cash(0);
    double value = 0.0;          // V_t
    double drifted_value = 0.0;  // V_t^f
    bool terminal = false;

    bool operator==(const EnvState&) const = default;
};

struct Observation {
    EnvState state;
    StateTensor tensor;
};

/// W_0 = all cash, V_0 = V_0^f = initial value, step = first decidable step.
/// Throws Error{FrameTooShort} unless at least one step can be taken.
Observation env_reset(const Market& market);

struct StepResult {
    EnvState state;
    std::optional<StateTensor> tensor;  // empty once terminal
    double reward = 0.0;                // ln(V_{t+1}^f / V_t^f)
    double mu = 1.0;                    // transaction factor of this rebalance
    RelativeVector relative;            // prices moved by these relatives
};

/// Rebalances W_t^f -> action (value shrinks by mu), then lets prices move one step.
/// Actions within 1e-6 of the simplex are renormalized, others throw
/// Error{InvalidAction}. Stepping a terminal state throws Error{SteppedAfterTerminal}.
StepResult env_step(const Market& market, const EnvState& state, std::span<const double> action);

}  // namespace folio
