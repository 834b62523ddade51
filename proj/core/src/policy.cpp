#include "folio/policy.hpp"

#include <algorithm>
#include <cmath>

#include "folio/errors.hpp"
#include "folio/rng.hpp"

namespace folio {

void PolicyParams::zero_grad() {
    for (auto& b : blocks) b.grad = ad::Tensor(b.value.shape(), 0.0);
}

std::size_t PolicyParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.value.size();
    return n;
}

namespace {

ad::Tensor glorot_uniform(ad::Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    ad::Tensor t(std::move(shape));
    for (double& v : t.data()) v = rng.uniform(-s, s);
    return t;
}

ParamBlock make_block(std::string name, ad::Tensor value, bool decays) {
    ParamBlock b{std::move(name), std::move(value), {}, decays};
    b.grad = ad::Tensor(b.value.shape(), 0.0);
    return b;
}

}  // namespace

PolicyParams init_policy(PolicyConfig config, std::uint64_t seed) {
    if (config.n_assets == 0) throw Error(ErrorCode::InvalidConfig, "policy needs at least one asset");
    if (config.kernel_width == 0 || config.window < config.kernel_width + 1) {
        throw Error(ErrorCode::WindowTooSmall, "window " + std::to_string(config.window) +
                                                   " must be at least kernel width + 1 = " +
                                                   std::to_string(config.kernel_width + 1));
    }
    const std::size_t k1 = config.kernel_width;
    const std::size_t c1 = config.conv1_channels;
    const std::size_t c2 = config.conv2_channels;
    const std::size_t w2 = config.conv2_width();

    Rng rng(seed);
    PolicyParams p;
    p.config = config;
    p.seed = seed;
    p[kConv1Kernels] = make_block("conv1.kernels", glorot_uniform({c1, kFeatureCount, k1}, kFeatureCount * k1, c1 * k1, rng), true);
    p[kConv1Bias] = make_block("conv1.bias", ad::Tensor({c1}), false);
    p[kConv2Kernels] = make_block("conv2.kernels", glorot_uniform({c2, c1, w2}, c1 * w2, c2 * w2, rng), true);
    p[kConv2Bias] = make_block("conv2.bias", ad::Tensor({c2}), false);
    p[kOutKernels] = make_block("out.kernels", glorot_uniform({1, c2 + 1, 1}, c2 + 1, 1, rng), true);
    p[kOutBias] = make_block("out.bias", ad::Tensor({1}), false);
    p[kCashBias] = make_block("cash_bias", ad::Tensor({1}), false);
    return p;
}

PolicyParams init_policy(std::size_t n_assets, std::size_t window, std::uint64_t seed) {
    PolicyConfig config;
    config.n_assets = n_assets;
    config.window = window;
    return init_policy(config, seed);
}

BoundPolicy bind_policy(ad::Tape& tape, const PolicyParams& params, bool track_gradients) {
    BoundPolicy bound;
    bound.config = &params.config;
    for (std::size_t i = 0; i < kParamBlockCount; ++i) {
        bound.vars[i] = track_gradients ? tape.variable(params.blocks[i].value)
                                        : tape.constant(params.blocks[i].value);
    }
    return bound;
}

ad::Var policy_forward(ad::Tape& tape, const BoundPolicy& policy, const StateTensor& state,
                       const WeightVector& last_action) {
    const PolicyConfig& cfg = *policy.config;
    const ad::Shape expected{kFeatureCount, cfg.n_assets, cfg.window};
    if (state.values.shape() != expected) {
        throw Error(ErrorCode::ShapeMismatch, "state has shape " + ad::shape_string(state.values.shape()) +
                                                  ", policy expects " + ad::shape_string(expected));
    }
    if (last_action.size() != cfg.n_assets + 1) {
        throw Error(ErrorCode::ShapeMismatch, "last action has " + std::to_string(last_action.size()) +
                                                  " entries, policy expects " +
                                                  std::to_string(cfg.n_assets + 1));
    }
    const auto& v = policy.vars;
    ad::Var x = tape.constant(state.values);
    ad::Var h1 = ad::relu(ad::conv1d_over_time(x, v[kConv1Kernels], v[kConv1Bias]));
    ad::Var h2 = ad::relu(ad::conv1d_over_time(h1, v[kConv2Kernels], v[kConv2Bias]));

    const auto w = last_action.values();
    ad::Var prev = tape.constant(ad::Tensor({1, cfg.n_assets, 1}, std::vector<double>(w.begin() + 1, w.end())));
    const ad::Var features[] = {h2, prev};
    ad::Var scores = ad::conv1d_over_time(ad::concat(features, 0), v[kOutKernels], v[kOutBias]);
    const ad::Var logits[] = {v[kCashBias], ad::reshape(scores, {cfg.n_assets})};
    return ad::softmax(ad::concat(logits, 0), 0);
}

ad::Var policy_forward_batch(ad::Tape& tape, const BoundPolicy& policy, std::span<const StateTensor* const> states,
                             std::span<const WeightVector* const> last_actions) {
    const PolicyConfig& cfg = *policy.config;
    const std::size_t batch = states.size();
    if (batch == 0 || last_actions.size() != batch) {
        throw Error(ErrorCode::ShapeMismatch, std::to_string(states.size()) + " states with " +
                                                  std::to_string(last_actions.size()) + " last actions");
    }
    const std::size_t n = cfg.n_assets, len = cfg.window;
    const ad::Shape expected{kFeatureCount, n, len};
    ad::Tensor x({kFeatureCount, batch * n, len});
    ad::Tensor prev({1, batch * n, 1});
    for (std::size_t b = 0; b < batch; ++b) {
        const ad::Tensor& sv = states[b]->values;
        if (sv.shape() != expected) {
            throw Error(ErrorCode::ShapeMismatch, "state has shape " + ad::shape_string(sv.shape()) +
                                                      ", policy expects " + ad::shape_string(expected));
        }
        if (last_actions[b]->size() != n + 1) {
            throw Error(ErrorCode::ShapeMismatch, "last action has " + std::to_string(last_actions[b]->size()) +
                                                      " entries, policy expects " + std::to_string(n + 1));
        }
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            std::copy_n(sv.data().begin() + f * n * len, n * len, x.data().begin() + (f * batch + b) * n * len);
        }
        const auto w = last_actions[b]->values();
        std::copy(w.begin() + 1, w.end(), prev.data().begin() + b * n);
    }
    const auto& v = policy.vars;
    ad::Var h1 = ad::relu(ad::conv1d_over_time(tape.constant(std::move(x)), v[kConv1Kernels], v[kConv1Bias]));
    ad::Var h2 = ad::relu(ad::conv1d_over_time(h1, v[kConv2Kernels], v[kConv2Bias]));
    const ad::Var features[] = {h2, tape.constant(std::move(prev))};
    ad::Var scores = ad::conv1d_over_time(ad::concat(features, 0), v[kOutKernels], v[kOutBias]);
    ad::Var cash = ad::mul(tape.constant(ad::Tensor({batch, 1}, 1.0)), v[kCashBias]);
    const ad::Var logits[] = {cash, ad::reshape(scores, {batch, n})};
    return ad::softmax(ad::concat(logits, 1), 1);
}

WeightVector policy_forward(const PolicyParams& params, const StateTensor& state,
                            const WeightVector& last_action) {
    ad::Tape tape;
    const BoundPolicy bound = bind_policy(tape, params, false);
    const ad::Var out = policy_forward(tape, bound, state, last_action);
    const auto d = out.value().data();
    return WeightVector(std::vector<double>(d.begin(), d.end()));
}

void collect_gradients(const BoundPolicy& bound, PolicyParams& params) {
    for (std::size_t i = 0; i < kParamBlockCount; ++i) {
        if (bound.vars[i].requires_grad()) params.blocks[i].grad = bound.vars[i].grad();
    }
}

}  // namespace folio
