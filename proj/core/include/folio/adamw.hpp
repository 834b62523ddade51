#pragma once

#include <array>
#include <cstdint>

#include "folio/policy.hpp"

namespace folio {

struct AdamWConfig {
    double learning_rate = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
};

/// First/second moment buffers mirroring PolicyParams, plus the step counter.
struct AdamWState {
    std::array<ad::Tensor, kParamBlockCount> first_moment;
    std::array<ad::Tensor, kParamBlockCount> second_moment;
    std::uint64_t step = 0;
};

AdamWState make_adamw_state(const PolicyParams& params);

/// One descent step on the gradients held in `params`:
///
///     theta <- theta * (1 - lr * lambda)          (blocks with decays = true)
///     theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
void adamw_step(PolicyParams& params, AdamWState& state, const AdamWConfig& config);

}  // namespace folio
