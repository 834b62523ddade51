#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "folio/autodiff.hpp"
#include "folio/normalization.hpp"
#include "folio/types.hpp"

namespace folio {

/// EIIE topology. Defaults: a 3-wide temporal convolution with 2 channels, a
/// convolution spanning the remaining window with 20 channels, then a 1x1
/// convolution over those 20 features plus the previous weight of the asset.
struct PolicyConfig {
    std::size_t n_assets = 0;
    std::size_t window = 50;
    std::size_t kernel_width = 3;
    std::size_t conv1_channels = 2;
    std::size_t conv2_channels = 20;

    std::size_t conv2_width() const { return window - kernel_width + 1; }
    bool operator==(const PolicyConfig&) const = default;
};

enum ParamIndex : std::size_t {
    kConv1Kernels,
    kConv1Bias,
    kConv2Kernels,
    kConv2Bias,
    kOutKernels,
    kOutBias,
    kCashBias,
    kParamBlockCount,
};

struct ParamBlock {
    std::string name;
    ad::Tensor value;
    ad::Tensor grad;
    /// Receives decoupled weight decay (kernels only).
    bool decays = false;
};

/// All learnable parameters plus gradient buffers of the same shapes.
struct PolicyParams {
    PolicyConfig config;
    std::uint64_t seed = 0;
    std::array<ParamBlock, kParamBlockCount> blocks;

    ParamBlock& operator[](ParamIndex i) { return blocks[i]; }
    const ParamBlock& operator[](ParamIndex i) const { return blocks[i]; }

    void zero_grad();
    std::size_t parameter_count() const;
};

/// Kernels ~ U[-s, s] with s = sqrt(6 / (fan_in + fan_out)); biases and cash bias 0.
/// Throws Error{WindowTooSmall} unless window >= kernel_width + 1.
PolicyParams init_policy(PolicyConfig config, std::uint64_t seed);
PolicyParams init_policy(std::size_t n_assets, std::size_t window, std::uint64_t seed);

/// Parameters placed on a tape, tracked or not.
struct BoundPolicy {
    std::array<ad::Var, kParamBlockCount> vars;
    const PolicyConfig* config = nullptr;
};

BoundPolicy bind_policy(ad::Tape& tape, const PolicyParams& params, bool track_gradients);

/// Differentiable forward: returns the (n + 1) softmax action as a tape node.
ad::Var policy_forward(ad::Tape& tape, const BoundPolicy& policy, const StateTensor& state,
                       const WeightVector& last_action);

/// Row b of the (B, n + 1) result is pi(states[b], last_actions[b]). The batch is
/// stacked along the asset axis, which the convolutions never mix.
ad::Var policy_forward_batch(ad::Tape& tape, const BoundPolicy& policy, std::span<const StateTensor* const> states,
                             std::span<const WeightVector* const> last_actions);

/// Pure evaluation, A_t = pi(S_t, A_{t-1}).
WeightVector policy_forward(const PolicyParams& params, const StateTensor& state,
                            const WeightVector& last_action);

/// Copies gradients of bound, tracked parameters into params' grad buffers.
void collect_gradients(const BoundPolicy& bound, PolicyParams& params);

}  // namespace folio
