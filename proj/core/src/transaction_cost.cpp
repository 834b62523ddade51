#include "folio/transaction_cost.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "folio/errors.hpp"

namespace folio {

namespace {

void check_inputs(const WeightVector& from, const WeightVector& to, double c) {
    if (from.size() != to.size()) {
        throw Error(ErrorCode::ShapeMismatch, "weight vectors of length " + std::to_string(from.size()) +
                                                  " and " + std::to_string(to.size()));
    }
    if (!(c >= 0.0 && c < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "commission rate " + std::to_string(c) + " outside [0, 1)");
    }
}

double selling_excess(const WeightVector& from, const WeightVector& to, double mu) {
    double s = 0.0;
    for (std::size_t i = 1; i < from.size(); ++i) s += std::max(from[i] - mu * to[i], 0.0);
    return s;
}

}  // namespace

double transaction_factor(const WeightVector& from, const WeightVector& to, double c) {
    check_inputs(from, to, c);
    double turnover = 0.0;
    for (std::size_t i = 1; i < from.size(); ++i) turnover += std::abs(from[i] - to[i]);

    const double k = 2.0 * c - c * c;
    const double denom = 1.0 - c * to[0];
    double mu = 1.0 - c * turnover;
    for (int it = 0; it < 10000; ++it) {
        const double next = (1.0 - c * from[0] - k * selling_excess(from, to, mu)) / denom;
        if (std::abs(next - mu) < 1e-12) return next;
        mu = next;
    }
    throw Error(ErrorCode::NoConvergence, "transaction factor did not converge (last mu " +
                                              std::to_string(mu) + ")");
}

double transaction_factor_oracle(const WeightVector& from, const WeightVector& to, double c) {
    check_inputs(from, to, c);
    const double k = 2.0 * c - c * c;
    auto g = [&](double mu) {
        return mu * (1.0 - c * to[0]) - (1.0 - c * from[0] - k * selling_excess(from, to, mu));
    };
    auto bisect = [&](double lo, double hi) -> std::optional<double> {
        double glo = g(lo), ghi = g(hi);
        if (glo == 0.0) return lo;
        if (ghi == 0.0) return hi;
        if ((glo < 0.0) == (ghi < 0.0)) return std::nullopt;
        while (hi - lo > 1e-14) {
            const double mid = 0.5 * (lo + hi);
            const double gm = g(mid);
            if (gm == 0.0) return mid;
            if ((gm < 0.0) == (glo < 0.0)) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };
    if (auto mu = bisect(std::max(0.0, 1.0 - 2.0 * c), 1.0)) return *mu;
    if (auto mu = bisect(0.0, 1.0)) return *mu;
    throw Error(ErrorCode::BracketFailure, "no sign change of the fixed-point residual on [0, 1]");
}

}  // namespace folio
