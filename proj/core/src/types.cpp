#include "folio/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "folio/errors.hpp"

namespace folio {

WeightVector::WeightVector(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) {
        throw Error(ErrorCode::InvalidAction, "weight vector must contain at least the cash entry");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
        const double v = w_[i];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw Error(ErrorCode::InvalidAction,
                        "weight " + std::to_string(i) + " = " + std::to_string(v) + " outside [0, 1]");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
        throw Error(ErrorCode::InvalidAction, "weights sum to " + std::to_string(sum));
    }
}

WeightVector WeightVector::all_cash(std::size_t n_assets) {
    std::vector<double> w(n_assets + 1, 0.0);
    w[0] = 1.0;
    return WeightVector(std::move(w));
}

WeightVector WeightVector::uniform(std::size_t n_assets) {
    return WeightVector(std::vector<double>(n_assets + 1, 1.0 / static_cast<double>(n_assets + 1)));
}

WeightVector WeightVector::equal_risky(std::size_t n_assets) {
    std::vector<double> w(n_assets + 1, 1.0 / static_cast<double>(n_assets));
    w[0] = 0.0;
    return WeightVector(std::move(w));
}

WeightVector WeightVector::from_action(std::span<const double> raw) {
    std::vector<double> w(raw.begin(), raw.end());
    double sum = 0.0;
    for (double& v : w) {
        if (!std::isfinite(v) || v < -1e-9) {
            throw Error(ErrorCode::InvalidAction, "action entry " + std::to_string(v) + " is not admissible");
        }
        v = std::max(v, 0.0);
        sum += v;
    }
    if (std::abs(sum - 1.0) > kActionRenormTolerance) {
        throw Error(ErrorCode::InvalidAction, "action sums to " + std::to_string(sum));
    }
    for (double& v : w) v /= sum;
    return WeightVector(std::move(w));
}

}  // namespace folio
