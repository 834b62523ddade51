#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "folio/tensor.hpp"

namespace folio::ad {

class Tape;

/// Handle to a tensor recorded on a Tape. Cheap to copy; valid while the tape lives
/// and has not been cleared.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    /// dLoss/dVar after Tape::backward; zeros if the node received no gradient.
    const Tensor& grad() const;
    bool requires_grad() const;

    Tape* tape() const noexcept { return tape_; }
    std::size_t id() const noexcept { return id_; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Records primitive operations in execution order; backward() replays them in
/// exact reverse. Gradients accumulate additively across fan-out.
///
/// A node needs a gradient iff it is a tracked leaf or one of its inputs does;
/// nodes built purely from constants carry no backward closure.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Tracked leaf (requires_grad).
    Var variable(Tensor value);
    /// Untracked leaf.
    Var constant(Tensor value);

    /// Populates gradients of every tracked node reachable from `loss`.
    /// Throws Error{NonScalarLoss} unless loss has exactly one element.
    void backward(Var loss);

    const Tensor& value(std::size_t id) const { return nodes_[id].value; }
    const Tensor& grad(std::size_t id) const;
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    std::size_t size() const noexcept { return nodes_.size(); }
    void clear() { nodes_.clear(); }

    /// Appends an op result. `backward` is dropped when no input requires grad.
    Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
    Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);
    /// Gradient buffer of a node, zero-allocated on first access during backward.
    Tensor& grad_accumulator(std::size_t id);

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        BackwardFn backward;
    };

    std::vector<Node> nodes_;
    Tensor empty_grad_;
};

// ---- primitives -------------------------------------------------------------
// Binary elementwise ops require equal shapes, except that either operand may be a
// single-element tensor, which is broadcast. All other shape disagreements throw
// Error{ShapeMismatch} naming both shapes.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var matmul(Var a, Var b);

/// Convolution along the last (time) axis only; each of the n asset rows is
/// processed with the same kernels and never mixed with another row.
/// input (C_in, n, t), kernels (C_out, C_in, k), bias (C_out) -> (C_out, n, t - k + 1).
Var conv1d_over_time(Var input, Var kernels, Var bias);
Var conv1d_over_time(Var input, Var kernels);

Var relu(Var a);
Var log(Var a);
Var exp(Var a);
Var softmax(Var a, std::size_t axis);
Var concat(std::span<const Var> parts, std::size_t axis);
Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t end);
Var reshape(Var a, Shape shape);
Var sum(Var a);
Var mean(Var a);
Var dot(Var a, Var b);

/// Central-difference check of d f / d x. Returns the max over coordinates of
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x, double eps = 1e-5);

}  // namespace folio::ad
