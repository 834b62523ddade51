#include "folio/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "folio/errors.hpp"

namespace folio::ad {

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::variable(Tensor value) {
    nodes_.push_back({std::move(value), {}, true, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
    nodes_.push_back({std::move(value), {}, false, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
    const bool tracked = std::any_of(inputs.begin(), inputs.end(),
                                     [](const Var& v) { return v.requires_grad(); });
    nodes_.push_back({std::move(value), {}, tracked, tracked ? std::move(backward) : BackwardFn{}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(backward));
}

Tensor& Tape::grad_accumulator(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.size() != n.value.size() || n.grad.shape() != n.value.shape()) {
        n.grad = Tensor(n.value.shape(), 0.0);
    }
    return n.grad;
}

const Tensor& Tape::grad(std::size_t id) const {
    const Node& n = nodes_[id];
    if (n.grad.shape() != n.value.shape()) {
        // Never reached by backward: report zeros of the right shape.
        const_cast<Tape*>(this)->empty_grad_ = Tensor(n.value.shape(), 0.0);
        return empty_grad_;
    }
    return n.grad;
}

void Tape::backward(Var loss) {
    if (loss.tape() != this) throw Error(ErrorCode::ShapeMismatch, "loss belongs to another tape");
    if (value(loss.id()).size() != 1) {
        throw Error(ErrorCode::NonScalarLoss,
                    "loss has shape " + shape_string(value(loss.id()).shape()));
    }
    for (auto& n : nodes_) n.grad = Tensor();
    grad_accumulator(loss.id())[0] = 1.0;
    for (std::size_t id = loss.id() + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (!n.requires_grad || !n.backward || n.grad.shape() != n.value.shape()) continue;
        n.backward(*this, id);
    }
}

namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(op) + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
}

struct AxisSplit {
    std::size_t outer = 1, axis = 1, inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
    AxisSplit r;
    for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
    r.axis = s[axis];
    for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
    return r;
}

enum class Broadcast { none, left, right };

Broadcast check_binary(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() == b.shape()) return Broadcast::none;
    if (a.size() == 1) return Broadcast::left;
    if (b.size() == 1) return Broadcast::right;
    shape_error(op, a.shape(), b.shape());
}

const Shape& result_shape(Broadcast mode, const Tensor& a, const Tensor& b) {
    return mode == Broadcast::left ? b.shape() : a.shape();
}

// Adds g into the gradient of `v`, summing if v was broadcast from one element.
// Four interleaved partial sums; fixed order, so results do not depend on flags.
double dot_n(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

void accumulate(Tape& tape, Var v, std::span<const double> g) {
    if (!v.requires_grad()) return;
    Tensor& acc = tape.grad_accumulator(v.id());
    if (acc.size() == 1 && g.size() != 1) {
        double s = 0.0;
        for (double x : g) s += x;
        acc[0] += s;
        return;
    }
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
}

}  // namespace

Var add(Var a, Var b) {
    Tape& tape = *a.tape();
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    const auto mode = check_binary("add", x, y);
    Tensor out(result_shape(mode, x, y));
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x[mode == Broadcast::left ? 0 : i] + y[mode == Broadcast::right ? 0 : i];
    }
    return tape.record(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        accumulate(t, a, g.data());
        accumulate(t, b, g.data());
    });
}

Var sub(Var a, Var b) {
    return add(a, scale(b, -1.0));
}

Var mul(Var a, Var b) {
    Tape& tape = *a.tape();
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    const auto mode = check_binary("mul", x, y);
    Tensor out(result_shape(mode, x, y));
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x[mode == Broadcast::left ? 0 : i] * y[mode == Broadcast::right ? 0 : i];
    }
    return tape.record(std::move(out), {a, b}, [a, b, mode](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& x = a.value();
        const Tensor& y = b.value();
        std::vector<double> ga(g.size()), gb(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] = g[i] * y[mode == Broadcast::right ? 0 : i];
            gb[i] = g[i] * x[mode == Broadcast::left ? 0 : i];
        }
        accumulate(t, a, ga);
        accumulate(t, b, gb);
    });
}

Var scale(Var a, double s) {
    Tensor out = a.value();
    for (double& v : out.data()) v *= s;
    return a.tape()->record(std::move(out), {a}, [a, s](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        Tensor& acc = t.grad_accumulator(a.id());
        for (std::size_t i = 0; i < g.size(); ++i) acc[i] += s * g[i];
    });
}

Var add_scalar(Var a, double s) {
    Tensor out = a.value();
    for (double& v : out.data()) v += s;
    return a.tape()->record(std::move(out), {a}, [a](Tape& t, std::size_t self) {
        accumulate(t, a, t.grad(self).data());
    });
}

Var matmul(Var a, Var b) {
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    if (x.rank() != 2 || y.rank() != 2 || x.dim(1) != y.dim(0)) shape_error("matmul", x.shape(), y.shape());
    const std::size_t m = x.dim(0), k = x.dim(1), n = y.dim(1);
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            const double xv = x[i * k + p];
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] += xv * y[p * n + j];
        }
    return a.tape()->record(std::move(out), {a, b}, [a, b, m, k, n](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& x = a.value();
        const Tensor& y = b.value();
        if (a.requires_grad()) {
            Tensor& ga = t.grad_accumulator(a.id());
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * y[p * n + j];
                    ga[i * k + p] += s;
                }
        }
        if (b.requires_grad()) {
            Tensor& gb = t.grad_accumulator(b.id());
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    const double xv = x[i * k + p];
                    for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += xv * g[i * n + j];
                }
        }
    });
}

namespace {

Var conv_impl(Var input, Var kernels, const Var* bias) {
    const Tensor& in = input.value();
    const Tensor& ker = kernels.value();
    if (in.rank() != 3 || ker.rank() != 3 || ker.dim(1) != in.dim(0) || ker.dim(2) > in.dim(2) ||
        ker.dim(2) == 0) {
        shape_error("conv1d_over_time", in.shape(), ker.shape());
    }
    const std::size_t c_in = in.dim(0), rows = in.dim(1), len = in.dim(2);
    const std::size_t c_out = ker.dim(0), k = ker.dim(2), out_len = len - k + 1;
    if (bias && (bias->value().rank() != 1 || bias->value().dim(0) != c_out)) {
        shape_error("conv1d_over_time bias", bias->value().shape(), ker.shape());
    }

    Tensor out({c_out, rows, out_len});
    const double* ip = in.data().data();
    const double* kp = ker.data().data();
    double* op = out.data().data();
    for (std::size_t o = 0; o < c_out; ++o) {
        const double b = bias ? bias->value()[o] : 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            double* dst = op + (o * rows + r) * out_len;
            std::fill(dst, dst + out_len, b);
            for (std::size_t c = 0; c < c_in; ++c) {
                const double* src = ip + (c * rows + r) * len;
                const double* w = kp + (o * c_in + c) * k;
                if (k >= out_len) {
                    for (std::size_t s = 0; s < out_len; ++s) dst[s] += dot_n(w, src + s, k);
                } else {
                    for (std::size_t j = 0; j < k; ++j)
                        for (std::size_t s = 0; s < out_len; ++s) dst[s] += w[j] * src[s + j];
                }
            }
        }
    }

    auto backward = [input, kernels, has_bias = bias != nullptr, bias_var = bias ? *bias : Var{},
                     c_in, rows, len, c_out, k, out_len](Tape& t, std::size_t self) {
        const double* g = t.grad(self).data().data();
        const double* ip = input.value().data().data();
        const double* kp = kernels.value().data().data();
        double* gin = input.requires_grad() ? t.grad_accumulator(input.id()).data().data() : nullptr;
        double* gk = kernels.requires_grad() ? t.grad_accumulator(kernels.id()).data().data() : nullptr;
        double* gb = has_bias && bias_var.requires_grad()
                         ? t.grad_accumulator(bias_var.id()).data().data()
                         : nullptr;
        for (std::size_t o = 0; o < c_out; ++o) {
            for (std::size_t r = 0; r < rows; ++r) {
                const double* go = g + (o * rows + r) * out_len;
                if (gb) {
                    double s = 0.0;
                    for (std::size_t q = 0; q < out_len; ++q) s += go[q];
                    gb[o] += s;
                }
                for (std::size_t c = 0; c < c_in; ++c) {
                    const std::size_t in_off = (c * rows + r) * len;
                    const std::size_t k_off = (o * c_in + c) * k;
                    if (gk) {
                        const double* src = ip + in_off;
                        if (out_len >= k) {
                            for (std::size_t j = 0; j < k; ++j) gk[k_off + j] += dot_n(go, src + j, out_len);
                        } else {
                            for (std::size_t q = 0; q < out_len; ++q)
                                for (std::size_t j = 0; j < k; ++j) gk[k_off + j] += go[q] * src[q + j];
                        }
                    }
                    if (gin) {
                        double* dst = gin + in_off;
                        const double* w = kp + k_off;
                        for (std::size_t q = 0; q < out_len; ++q) {
                            const double gq = go[q];
                            for (std::size_t j = 0; j < k; ++j) dst[q + j] += gq * w[j];
                        }
                    }
                }
            }
        }
    };
    if (bias) return input.tape()->record(std::move(out), {input, kernels, *bias}, std::move(backward));
    return input.tape()->record(std::move(out), {input, kernels}, std::move(backward));
}

}  // namespace

Var conv1d_over_time(Var input, Var kernels, Var bias) { return conv_impl(input, kernels, &bias); }
Var conv1d_over_time(Var input, Var kernels) { return conv_impl(input, kernels, nullptr); }

Var relu(Var a) {
    Tensor out = a.value();
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return a.tape()->record(std::move(out), {a}, [a](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& x = a.value();
        Tensor& acc = t.grad_accumulator(a.id());
        // subgradient at 0 is 0
        for (std::size_t i = 0; i < g.size(); ++i)
            if (x[i] > 0.0) acc[i] += g[i];
    });
}

Var log(Var a) {
    Tensor out = a.value();
    for (double& v : out.data()) v = std::log(v);
    return a.tape()->record(std::move(out), {a}, [a](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& x = a.value();
        Tensor& acc = t.grad_accumulator(a.id());
        for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i] / x[i];
    });
}

Var exp(Var a) {
    Tensor out = a.value();
    for (double& v : out.data()) v = std::exp(v);
    return a.tape()->record(std::move(out), {a}, [a](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& y = t.value(self);
        Tensor& acc = t.grad_accumulator(a.id());
        for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i] * y[i];
    });
}

Var softmax(Var a, std::size_t axis) {
    const Tensor& x = a.value();
    if (axis >= x.rank()) shape_error("softmax axis", x.shape(), Shape{axis});
    const auto sp = split_at(x.shape(), axis);
    Tensor out(x.shape());
    for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t in = 0; in < sp.inner; ++in) {
            auto idx = [&](std::size_t j) { return (o * sp.axis + j) * sp.inner + in; };
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < sp.axis; ++j) mx = std::max(mx, x[idx(j)]);
            double z = 0.0;
            for (std::size_t j = 0; j < sp.axis; ++j) {
                out[idx(j)] = std::exp(x[idx(j)] - mx);
                z += out[idx(j)];
            }
            for (std::size_t j = 0; j < sp.axis; ++j) out[idx(j)] /= z;
        }
    return a.tape()->record(std::move(out), {a}, [a, sp](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& y = t.value(self);
        Tensor& acc = t.grad_accumulator(a.id());
        for (std::size_t o = 0; o < sp.outer; ++o)
            for (std::size_t in = 0; in < sp.inner; ++in) {
                auto idx = [&](std::size_t j) { return (o * sp.axis + j) * sp.inner + in; };
                double dotp = 0.0;
                for (std::size_t j = 0; j < sp.axis; ++j) dotp += g[idx(j)] * y[idx(j)];
                for (std::size_t j = 0; j < sp.axis; ++j) acc[idx(j)] += y[idx(j)] * (g[idx(j)] - dotp);
            }
    });
}

Var concat(std::span<const Var> parts, std::size_t axis) {
    if (parts.empty()) throw Error(ErrorCode::ShapeMismatch, "concat of zero tensors");
    const Shape& first = parts.front().shape();
    if (axis >= first.size()) shape_error("concat axis", first, Shape{axis});
    Shape out_shape = first;
    out_shape[axis] = 0;
    for (const Var& p : parts) {
        const Shape& s = p.shape();
        if (s.size() != first.size()) shape_error("concat", first, s);
        for (std::size_t d = 0; d < s.size(); ++d)
            if (d != axis && s[d] != first[d]) shape_error("concat", first, s);
        out_shape[axis] += s[axis];
    }
    const auto sp = split_at(out_shape, axis);
    Tensor out(out_shape);
    std::vector<std::size_t> offsets;
    std::size_t off = 0;
    for (const Var& p : parts) {
        offsets.push_back(off);
        const Tensor& v = p.value();
        const std::size_t pa = v.dim(axis);
        for (std::size_t o = 0; o < sp.outer; ++o)
            std::copy_n(v.data().begin() + o * pa * sp.inner, pa * sp.inner,
                        out.data().begin() + (o * sp.axis + off) * sp.inner);
        off += pa;
    }
    std::vector<Var> inputs(parts.begin(), parts.end());
    return parts.front().tape()->record(
        std::move(out), inputs, [inputs, offsets, sp, axis](Tape& t, std::size_t self) {
            const Tensor& g = t.grad(self);
            for (std::size_t p = 0; p < inputs.size(); ++p) {
                if (!inputs[p].requires_grad()) continue;
                Tensor& acc = t.grad_accumulator(inputs[p].id());
                const std::size_t pa = acc.dim(axis);
                for (std::size_t o = 0; o < sp.outer; ++o)
                    for (std::size_t q = 0; q < pa * sp.inner; ++q)
                        acc[o * pa * sp.inner + q] += g[(o * sp.axis + offsets[p]) * sp.inner + q];
            }
        });
}

Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t end) {
    const Tensor& x = a.value();
    if (axis >= x.rank() || begin > end || end > x.dim(axis)) {
        shape_error("slice", x.shape(), Shape{axis, begin, end});
    }
    const auto sp = split_at(x.shape(), axis);
    Shape out_shape = x.shape();
    out_shape[axis] = end - begin;
    const std::size_t len = end - begin;
    Tensor out(out_shape);
    for (std::size_t o = 0; o < sp.outer; ++o)
        std::copy_n(x.data().begin() + (o * sp.axis + begin) * sp.inner, len * sp.inner,
                    out.data().begin() + o * len * sp.inner);
    return a.tape()->record(std::move(out), {a}, [a, sp, begin, len](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        Tensor& acc = t.grad_accumulator(a.id());
        for (std::size_t o = 0; o < sp.outer; ++o)
            for (std::size_t q = 0; q < len * sp.inner; ++q)
                acc[(o * sp.axis + begin) * sp.inner + q] += g[o * len * sp.inner + q];
    });
}

Var reshape(Var a, Shape shape) {
    Tensor out = a.value().reshaped(std::move(shape));
    return a.tape()->record(std::move(out), {a}, [a](Tape& t, std::size_t self) {
        accumulate(t, a, t.grad(self).data());
    });
}

Var sum(Var a) {
    double s = 0.0;
    for (double v : a.value().data()) s += v;
    return a.tape()->record(Tensor::scalar(s), {a}, [a](Tape& t, std::size_t self) {
        const double g = t.grad(self)[0];
        Tensor& acc = t.grad_accumulator(a.id());
        for (double& v : acc.data()) v += g;
    });
}

Var mean(Var a) {
    return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var dot(Var a, Var b) {
    if (a.shape() != b.shape()) shape_error("dot", a.shape(), b.shape());
    return sum(mul(a, b));
}

double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x, double eps) {
    Tensor analytic;
    {
        Tape tape;
        Var xv = tape.variable(x);
        Var y = f(tape, xv);
        tape.backward(y);
        analytic = xv.grad();
    }
    auto eval = [&](const Tensor& at) {
        Tape tape;
        return f(tape, tape.constant(at)).value()[0];
    };
    double worst = 0.0;
    Tensor probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + eps;
        const double fp = eval(probe);
        probe[i] = orig - eps;
        const double fm = eval(probe);
        probe[i] = orig;
        const double numeric = (fp - fm) / (2.0 * eps);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

}  // namespace folio::ad
