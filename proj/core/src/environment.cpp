#include "folio/environment.hpp"

#include <cmath>

#include "folio/errors.hpp"

namespace folio {

StateTensor build_state(const MarketFrame& frame, std::size_t step, std::size_t window,
                        const NormalizationScheme& scheme) {
    return normalize_window(scheme, extract_window(frame, step, window));
}

WeightVector drift_weights(const WeightVector& w, const RelativeVector& y) {
    if (w.size() != y.size()) {
        throw Error(ErrorCode::ShapeMismatch, "weights of length " + std::to_string(w.size()) +
                                                  " vs relatives of length " + std::to_string(y.size()));
    }
    std::vector<double> out(w.size());
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        out[i] = w[i] * y[i];
        total += out[i];
    }
    for (double& v : out) v /= total;
    return WeightVector(std::move(out));
}

double drift_value(double value, const WeightVector& w, const RelativeVector& y) {
    if (w.size() != y.size()) throw Error(ErrorCode::ShapeMismatch, "weights vs relatives length");
    double growth = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) growth += w[i] * y[i];
    return value * growth;
}

Market::Market(MarketFrame prices, NormalizationScheme scheme, std::size_t window,
               double commission, double initial_value)
    : prices_(std::move(prices)),
      scheme_(std::move(scheme)),
      window_(window),
      commission_(commission),
      initial_value_(initial_value) {
    if (window_ == 0) throw Error(ErrorCode::WindowOutOfRange, "time window must be positive");
    if (!(initial_value_ > 0.0)) throw Error(ErrorCode::InvalidConfig, "initial value must be positive");
    if (!(commission_ >= 0.0 && commission_ < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "commission rate must lie in [0, 1)");
    }
    if (scheme_.kind() == NormalizationKind::data_max) features_ = apply_data_max(scheme_, prices_);
}

StateTensor Market::state_at(std::size_t step) const {
    return build_state(features(), step, window_, scheme_);
}

RelativeVector Market::relative_after(std::size_t step) const {
    return price_relatives(prices_, step + 1);
}

Observation env_reset(const Market& market) {
    if (market.prices().length() <= market.window()) {
        throw Error(ErrorCode::FrameTooShort,
                    "frame of length " + std::to_string(market.prices().length()) +
                        " leaves no decision step for window " + std::to_string(market.window()));
    }
    EnvState s;
    s.step = market.first_step();
    s.weights = WeightVector::all_cash(market.n_assets());
    s.drifted = s.weights;
    s.value = market.initial_value();
    s.drifted_value = market.initial_value();
    s.terminal = false;
    return {s, market.state_at(s.step)};
}

StepResult env_step(const Market& market, const EnvState& state, std::span<const double> action) {
    if (state.terminal) {
        throw Error(ErrorCode::SteppedAfterTerminal, "episode ended at step " + std::to_string(state.step));
    }
    if (action.size() != market.n_assets() + 1) {
        throw Error(ErrorCode::InvalidAction, "action has " + std::to_string(action.size()) +
                                                  " entries, expected " +
                                                  std::to_string(market.n_assets() + 1));
    }
    const WeightVector target = WeightVector::from_action(action);

    StepResult r;
    r.mu = transaction_factor(state.drifted, target, market.commission());
    const double rebalanced_value = r.mu * state.drifted_value;

    r.relative = market.relative_after(state.step);
    EnvState next;
    next.step = state.step + 1;
    next.weights = target;
    next.value = rebalanced_value;
    next.drifted = drift_weights(target, r.relative);
    next.drifted_value = drift_value(rebalanced_value, target, r.relative);
    next.terminal = next.step + 1 >= market.prices().length();
    r.reward = std::log(next.drifted_value / state.drifted_value);
    if (!next.terminal) r.tensor = market.state_at(next.step);
    r.state = std::move(next);
    return r;
}

}  // namespace folio
