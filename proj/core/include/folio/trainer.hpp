#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "folio/adamw.hpp"
#include "folio/autodiff.hpp"
#include "folio/environment.hpp"
#include "folio/policy.hpp"
#include "folio/rng.hpp"

namespace folio {

/// How the transaction factor mu enters the gradient of the batch objective.
enum class MuGradient {
    /// d mu / d a from the implicit function theorem on the fixed-point equation.
    implicit,
    /// mu treated as a constant (only a_t . y_t is differentiated).
    constant,
};

std::string_view to_string(MuGradient mode);
std::optional<MuGradient> parse_mu_gradient(std::string_view text);

struct TrainerConfig {
    double learning_rate = 5e-5;
    std::size_t batch_size = 200;
    double sample_bias = 0.002;
    std::size_t steps = 300000;
    std::size_t online_steps = 30;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    MuGradient mu_gradient = MuGradient::implicit;
    /// Loss records are averaged over this many steps.
    std::size_t log_every = 100;

    AdamWConfig adamw() const { return {learning_rate, beta1, beta2, epsilon, weight_decay}; }
};

struct Experience {
    std::size_t step = 0;
    StateTensor state;
    /// Action taken at the previous step (pre-drift); rewritten as the policy trains.
    WeightVector last_action = WeightVector::all_cash(0);
    /// Price relatives of the transition out of `step`.
    RelativeVector relative;
};

class ReplayBuffer {
public:
    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    Experience& operator[](std::size_t i) { return items_[i]; }
    const Experience& operator[](std::size_t i) const { return items_[i]; }
    void push_back(Experience e) { items_.push_back(std::move(e)); }

    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

private:
    std::vector<Experience> items_;
};

/// Half-open index range [begin, end) into a ReplayBuffer.
struct BatchRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool operator==(const BatchRange&) const = default;
};

struct TrajectoryPoint {
    std::size_t step = 0;    // decision step in the market frame
    double value = 0.0;      // V^f after the step
    WeightVector action = WeightVector::all_cash(0);
    double reward = 0.0;
};

struct Trajectory {
    double initial_value = 0.0;
    std::vector<TrajectoryPoint> points;

    /// [V_0, V_1^f, ..., V_T^f]
    std::vector<double> values() const;
    std::size_t size() const noexcept { return points.size(); }
};

/// Greedy rollout through the whole episode, one experience per decision step;
/// the first experience's last action is all cash.
ReplayBuffer fill_buffer(const Market& market, const PolicyParams& params);

/// Pure evaluation rollout; touches no trainer state.
Trajectory evaluate(const Market& market, const PolicyParams& params);

/// Draws k ~ Geometric(beta) and anchors the batch at the latest valid start minus k.
/// Out-of-range draws are redrawn up to 100 times, then clamped to the earliest start.
BatchRange sample_batch(std::size_t buffer_size, std::size_t batch_size, double beta, Rng& rng);

/// Differentiable transaction factor: value from transaction_factor(from, a, c).
/// Under MuGradient::constant the node carries no gradient.
ad::Var transaction_factor_node(ad::Var action, const WeightVector& from, double c, MuGradient mode);

/// Row-wise transaction_factor_node over a (B, n + 1) action matrix.
ad::Var transaction_factor_batch_node(ad::Var actions, std::span<const WeightVector> from, double c,
                                      MuGradient mode);

/// (1 / |range|) * sum_t ln(mu_t * (a_t . y_t)) with a_t = pi(S_t, A_{t-1}) and
/// mu_t the rebalancing cost from the drifted previous action to a_t.
ad::Var batch_objective(ad::Tape& tape, const BoundPolicy& policy, const ReplayBuffer& buffer,
                        BatchRange range, double commission, MuGradient mode = MuGradient::implicit);

double batch_objective_value(const PolicyParams& params, const ReplayBuffer& buffer, BatchRange range,
                             double commission);

struct LossRecord {
    std::size_t step = 0;
    double loss = 0.0;  // mean negated objective over the logging interval
};

/// One training run's policy, optimizer, buffer and RNG. Not shared across threads.
class Trainer {
public:
    Trainer(Market train_market, PolicyParams params, TrainerConfig config, std::uint64_t seed);

    /// Rolls the current policy through the training episode to (re)build the buffer.
    void fill_buffer();

    /// Sample a batch, ascend the objective with AdamW, rewrite the batch's last
    /// actions with the updated policy. Returns the loss (negated objective).
    /// Throws Error{NonFiniteLoss} on a non-finite loss.
    double train_step();

    /// Runs `steps` train_steps; `on_step(step)` is called after each one.
    void train(std::size_t steps, const std::function<void(std::size_t)>& on_step = {});

    /// Walks the test market: act, step, append the new experience, then run
    /// `online_steps` train_steps over the extended buffer.
    Trajectory backtest(const Market& test_market, std::size_t online_steps);

    const PolicyParams& params() const noexcept { return params_; }
    const ReplayBuffer& buffer() const noexcept { return buffer_; }
    const AdamWState& optimizer() const noexcept { return optimizer_; }
    const std::vector<LossRecord>& loss_log() const noexcept { return loss_log_; }
    const Market& market() const noexcept { return market_; }
    std::size_t steps_done() const noexcept { return steps_done_; }
    BatchRange last_batch() const noexcept { return last_batch_; }

private:
    void rewrite_buffer(BatchRange range);

    Market market_;
    PolicyParams params_;
    TrainerConfig config_;
    AdamWState optimizer_;
    ReplayBuffer buffer_;
    Rng rng_;
    std::vector<LossRecord> loss_log_;
    double loss_accumulator_ = 0.0;
    std::size_t steps_done_ = 0;
    BatchRange last_batch_;
};

}  // namespace folio
