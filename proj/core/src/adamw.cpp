#include "folio/adamw.hpp"

#include <cmath>

#include "folio/errors.hpp"

namespace folio {

AdamWState make_adamw_state(const PolicyParams& params) {
    AdamWState s;
    for (std::size_t i = 0; i < kParamBlockCount; ++i) {
        s.first_moment[i] = ad::Tensor(params.blocks[i].value.shape(), 0.0);
        s.second_moment[i] = ad::Tensor(params.blocks[i].value.shape(), 0.0);
    }
    return s;
}

void adamw_step(PolicyParams& params, AdamWState& state, const AdamWConfig& config) {
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bias1 = 1.0 - std::pow(config.beta1, t);
    const double bias2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t b = 0; b < kParamBlockCount; ++b) {
        ParamBlock& block = params.blocks[b];
        if (block.grad.shape() != block.value.shape()) {
            throw Error(ErrorCode::ShapeMismatch, "gradient buffer of " + block.name + " has shape " +
                                                      ad::shape_string(block.grad.shape()));
        }
        ad::Tensor& m = state.first_moment[b];
        ad::Tensor& v = state.second_moment[b];
        const double decay = block.decays ? 1.0 - config.learning_rate * config.weight_decay : 1.0;
        for (std::size_t i = 0; i < block.value.size(); ++i) {
            const double g = block.grad[i];
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
            const double m_hat = m[i] / bias1;
            const double v_hat = v[i] / bias2;
            block.value[i] = block.value[i] * decay -
                             config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
        }
    }
}

}  // namespace folio
