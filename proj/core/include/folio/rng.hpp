#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace folio {

/// Seedable generator over mt19937_64. Draws come straight from engine output,
/// never from std:: distributions, and are portable across standard libraries.
class Rng {
public:
    static constexpr std::string_view kName = "mt19937_64";

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Number of failures before the first success, P(k) = p (1 - p)^k.
    std::uint64_t geometric(double p) {
        if (p >= 1.0) return 0;
        // 1 - u lies in (0, 1], so the log is finite
        const double u = 1.0 - uniform01();
        return static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace folio
