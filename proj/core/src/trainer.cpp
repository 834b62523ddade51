#include "folio/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "folio/errors.hpp"

namespace folio {

std::string_view to_string(MuGradient mode) {
    return mode == MuGradient::implicit ? "implicit" : "constant";
}

std::optional<MuGradient> parse_mu_gradient(std::string_view text) {
    if (text == "implicit") return MuGradient::implicit;
    if (text == "constant") return MuGradient::constant;
    return std::nullopt;
}

std::vector<double> Trajectory::values() const {
    std::vector<double> v;
    v.reserve(points.size() + 1);
    v.push_back(initial_value);
    for (const auto& p : points) v.push_back(p.value);
    return v;
}

namespace {

template <typename OnStep>
void rollout(const Market& market, const PolicyParams& params, OnStep&& on_step) {
    Observation obs = env_reset(market);
    EnvState state = obs.state;
    StateTensor tensor = std::move(obs.tensor);
    WeightVector last = state.weights;
    while (true) {
        WeightVector action = policy_forward(params, tensor, last);
        StepResult r = env_step(market, state, action.values());
        on_step(state, tensor, last, action, r);
        last = std::move(action);
        state = r.state;
        if (state.terminal) break;
        tensor = std::move(*r.tensor);
    }
}

}  // namespace

ReplayBuffer fill_buffer(const Market& market, const PolicyParams& params) {
    ReplayBuffer buffer;
    rollout(market, params,
            [&](const EnvState& s, const StateTensor& x, const WeightVector& last, const WeightVector&,
                const StepResult& r) { buffer.push_back({s.step, x, last, r.relative}); });
    return buffer;
}

Trajectory evaluate(const Market& market, const PolicyParams& params) {
    Trajectory traj{market.initial_value(), {}};
    rollout(market, params,
            [&](const EnvState& s, const StateTensor&, const WeightVector&, const WeightVector& a,
                const StepResult& r) {
                traj.points.push_back({s.step, r.state.drifted_value, a, r.reward});
            });
    return traj;
}

BatchRange sample_batch(std::size_t buffer_size, std::size_t batch_size, double beta, Rng& rng) {
    if (batch_size == 0 || batch_size > buffer_size) {
        throw Error(ErrorCode::BatchTooLarge, "batch of " + std::to_string(batch_size) +
                                                  " from a buffer of " + std::to_string(buffer_size));
    }
    const std::size_t latest = buffer_size - batch_size;
    std::size_t start = 0;
    for (int attempt = 0; attempt <= 100; ++attempt) {
        const std::uint64_t k = rng.geometric(beta);
        if (k <= latest) {
            start = latest - static_cast<std::size_t>(k);
            break;
        }
    }
    return {start, start + batch_size};
}

namespace {

// mu * (1 - c a_0) = 1 - c from_0 - k * sum_i max(from_i - mu a_i, 0), so with
// A = sum over active i of a_i and D = 1 - c a_0 - k A:
//   d mu / d a_0 = mu c / D,  d mu / d a_i = k mu / D (active i), 0 otherwise.
double mu_with_gradient(const WeightVector& from, std::span<const double> a, double c, double* dmu) {
    const WeightVector to(std::vector<double>(a.begin(), a.end()));
    const double mu = transaction_factor(from, to, c);
    if (!dmu) return mu;
    const double k = 2.0 * c - c * c;
    double active_sum = 0.0;
    for (std::size_t i = 1; i < a.size(); ++i)
        if (from[i] - mu * a[i] > 0.0) active_sum += a[i];
    const double denom = 1.0 - c * a[0] - k * active_sum;
    dmu[0] = mu * c / denom;
    for (std::size_t i = 1; i < a.size(); ++i) dmu[i] = from[i] - mu * a[i] > 0.0 ? k * mu / denom : 0.0;
    return mu;
}

// Per-row a . y against a constant y.
ad::Var row_dot(ad::Var a, const ad::Tensor& y) {
    const ad::Tensor& x = a.value();
    if (x.rank() != 2 || x.shape() != y.shape()) throw Error(ErrorCode::ShapeMismatch, "row_dot operands differ");
    const std::size_t rows = x.dim(0), width = x.dim(1);
    ad::Tensor out({rows});
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < width; ++j) out[r] += x[r * width + j] * y[r * width + j];
    return a.tape()->record(std::move(out), {a}, [a, y, width](ad::Tape& t, std::size_t self) {
        const ad::Tensor& g = t.grad(self);
        ad::Tensor& acc = t.grad_accumulator(a.id());
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i / width] * y[i];
    });
}

}  // namespace

ad::Var transaction_factor_node(ad::Var action, const WeightVector& from, double c, MuGradient mode) {
    ad::Tape& tape = *action.tape();
    const auto a = action.value().data();
    if (mode == MuGradient::constant || c == 0.0) {
        return tape.constant(ad::Tensor::scalar(mu_with_gradient(from, a, c, nullptr)));
    }
    std::vector<double> dmu(a.size());
    const double mu = mu_with_gradient(from, a, c, dmu.data());
    return tape.record(ad::Tensor::scalar(mu), {action},
                       [action, dmu = std::move(dmu)](ad::Tape& t, std::size_t self) {
                           const double g = t.grad(self)[0];
                           ad::Tensor& acc = t.grad_accumulator(action.id());
                           for (std::size_t i = 0; i < dmu.size(); ++i) acc[i] += g * dmu[i];
                       });
}

ad::Var transaction_factor_batch_node(ad::Var actions, std::span<const WeightVector> from, double c,
                                      MuGradient mode) {
    ad::Tape& tape = *actions.tape();
    const ad::Tensor& a = actions.value();
    if (a.rank() != 2 || a.dim(0) != from.size()) {
        throw Error(ErrorCode::ShapeMismatch, "actions " + ad::shape_string(a.shape()) + " for " +
                                                  std::to_string(from.size()) + " source compositions");
    }
    const std::size_t batch = a.dim(0), width = a.dim(1);
    const bool tracked = mode == MuGradient::implicit && c != 0.0;
    ad::Tensor mu({batch});
    std::vector<double> dmu(tracked ? batch * width : 0);
    for (std::size_t b = 0; b < batch; ++b) {
        mu[b] = mu_with_gradient(from[b], a.data().subspan(b * width, width), c,
                                 tracked ? dmu.data() + b * width : nullptr);
    }
    if (!tracked) return tape.constant(std::move(mu));
    return tape.record(std::move(mu), {actions},
                       [actions, width, dmu = std::move(dmu)](ad::Tape& t, std::size_t self) {
                           const ad::Tensor& g = t.grad(self);
                           ad::Tensor& acc = t.grad_accumulator(actions.id());
                           for (std::size_t i = 0; i < dmu.size(); ++i) acc[i] += g[i / width] * dmu[i];
                       });
}

ad::Var batch_objective(ad::Tape& tape, const BoundPolicy& policy, const ReplayBuffer& buffer,
                        BatchRange range, double commission, MuGradient mode) {
    if (range.begin >= range.end || range.end > buffer.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "batch [" + std::to_string(range.begin) + ", " +
                                                    std::to_string(range.end) + ") of buffer size " +
                                                    std::to_string(buffer.size()));
    }
    const std::size_t batch = range.size();
    std::vector<const StateTensor*> states;
    std::vector<const WeightVector*> lasts;
    std::vector<WeightVector> from;
    states.reserve(batch);
    lasts.reserve(batch);
    from.reserve(batch);
    for (std::size_t t = range.begin; t < range.end; ++t) {
        const Experience& e = buffer[t];
        states.push_back(&e.state);
        lasts.push_back(&e.last_action);
        // Composition just before rebalancing: the previous action after prices moved.
        from.push_back(t == 0 ? e.last_action : drift_weights(e.last_action, buffer[t - 1].relative));
    }
    ad::Var actions = policy_forward_batch(tape, policy, states, lasts);
    const std::size_t width = actions.shape()[1];
    ad::Tensor y({batch, width});
    for (std::size_t b = 0; b < batch; ++b) {
        const auto& rel = buffer[range.begin + b].relative.y;
        if (rel.size() != width) throw Error(ErrorCode::ShapeMismatch, "relative vector width");
        std::copy(rel.begin(), rel.end(), y.data().begin() + b * width);
    }
    ad::Var mu = transaction_factor_batch_node(actions, from, commission, mode);
    return ad::mean(ad::log(ad::mul(mu, row_dot(actions, y))));
}

double batch_objective_value(const PolicyParams& params, const ReplayBuffer& buffer, BatchRange range,
                             double commission) {
    ad::Tape tape;
    const BoundPolicy bound = bind_policy(tape, params, false);
    return batch_objective(tape, bound, buffer, range, commission).value()[0];
}

Trainer::Trainer(Market train_market, PolicyParams params, TrainerConfig config, std::uint64_t seed)
    : market_(std::move(train_market)),
      params_(std::move(params)),
      config_(config),
      optimizer_(make_adamw_state(params_)),
      rng_(seed, /*stream=*/1) {
    if (params_.config.n_assets != market_.n_assets() || params_.config.window != market_.window()) {
        throw Error(ErrorCode::ShapeMismatch, "policy configured for " +
                                                  std::to_string(params_.config.n_assets) + " assets / window " +
                                                  std::to_string(params_.config.window) + ", market has " +
                                                  std::to_string(market_.n_assets()) + " / " +
                                                  std::to_string(market_.window()));
    }
    if (config_.log_every == 0) config_.log_every = 1;
}

void Trainer::fill_buffer() { buffer_ = folio::fill_buffer(market_, params_); }

double Trainer::train_step() {
    if (buffer_.empty()) fill_buffer();
    const BatchRange range = sample_batch(buffer_.size(), config_.batch_size, config_.sample_bias, rng_);
    last_batch_ = range;

    double loss = 0.0;
    {
        ad::Tape tape;
        const BoundPolicy bound = bind_policy(tape, params_, true);
        const ad::Var objective =
            batch_objective(tape, bound, buffer_, range, market_.commission(), config_.mu_gradient);
        const ad::Var loss_var = ad::scale(objective, -1.0);
        loss = loss_var.value()[0];
        if (!std::isfinite(loss)) {
            throw Error(ErrorCode::NonFiniteLoss, "loss " + std::to_string(loss) + " at step " +
                                                      std::to_string(steps_done_) + " on batch [" +
                                                      std::to_string(range.begin) + ", " +
                                                      std::to_string(range.end) + ")");
        }
        tape.backward(loss_var);
        collect_gradients(bound, params_);
    }
    adamw_step(params_, optimizer_, config_.adamw());
    rewrite_buffer(range);

    ++steps_done_;
    loss_accumulator_ += loss;
    if (steps_done_ % config_.log_every == 0) {
        loss_log_.push_back({steps_done_, loss_accumulator_ / static_cast<double>(config_.log_every)});
        loss_accumulator_ = 0.0;
    }
    return loss;
}

void Trainer::rewrite_buffer(BatchRange range) {
    for (std::size_t t = range.begin; t < range.end && t + 1 < buffer_.size(); ++t) {
        buffer_[t + 1].last_action = policy_forward(params_, buffer_[t].state, buffer_[t].last_action);
    }
}

void Trainer::train(std::size_t steps, const std::function<void(std::size_t)>& on_step) {
    for (std::size_t i = 0; i < steps; ++i) {
        train_step();
        if (on_step) on_step(steps_done_);
    }
}

Trajectory Trainer::backtest(const Market& test_market, std::size_t online_steps) {
    if (buffer_.empty()) fill_buffer();
    Trajectory traj{test_market.initial_value(), {}};
    rollout(test_market, params_,
            [&](const EnvState& s, const StateTensor& x, const WeightVector& last, const WeightVector& a,
                const StepResult& r) {
                traj.points.push_back({s.step, r.state.drifted_value, a, r.reward});
                buffer_.push_back({s.step, x, last, r.relative});
                for (std::size_t k = 0; k < online_steps; ++k) train_step();
            });
    return traj;
}

}  // namespace folio
