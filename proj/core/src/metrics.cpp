#include "folio/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "folio/errors.hpp"

namespace folio {

namespace {

void require_values(std::span<const double> values) {
    if (values.size() < 2) throw Error(ErrorCode::EmptyTrajectory, "trajectory has no steps");
}

}  // namespace

double fapv(std::span<const double> values) {
    require_values(values);
    return values.back() / values.front();
}

double mdd(std::span<const double> values) {
    require_values(values);
    double peak = values.front();
    double worst = 0.0;
    for (double v : values) {
        if (v > peak) peak = v;
        worst = std::max(worst, (peak - v) / peak);
    }
    return worst;
}

double sharpe(std::span<const double> values, double rho_free) {
    if (values.size() < 3) {
        throw Error(ErrorCode::TooShort, "Sharpe ratio needs at least two returns");
    }
    std::vector<double> excess;
    excess.reserve(values.size() - 1);
    for (std::size_t t = 1; t < values.size(); ++t) excess.push_back(values[t] / values[t - 1] - rho_free);

    const double n = static_cast<double>(excess.size());
    double mean = 0.0;
    for (double x : excess) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : excess) var += (x - mean) * (x - mean);
    var /= n;
    const double sd = std::sqrt(var);
    // Rounding of V_t / V_{t-1} leaves ulp-level spread on genuinely constant returns.
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
        throw Error(ErrorCode::ZeroVariance, "returns are constant");
    }
    return mean / sd;
}

double fapv(const Trajectory& traj, double initial_value) {
    if (traj.points.empty()) throw Error(ErrorCode::EmptyTrajectory, "trajectory has no steps");
    return traj.points.back().value / initial_value;
}

double mdd(const Trajectory& traj) { return mdd(traj.values()); }

double sharpe(const Trajectory& traj, double rho_free) { return sharpe(traj.values(), rho_free); }

MetricReport compute_metrics(const Trajectory& traj) {
    const auto values = traj.values();
    MetricReport r;
    r.fapv = fapv(traj, traj.initial_value);
    r.mdd = mdd(values);
    r.n_steps = traj.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try {
        r.sharpe = sharpe(values, 0.0);
        r.sharpe_excess = sharpe(values, 1.0);
    } catch (const Error&) {
        r.sharpe = nan;
        r.sharpe_excess = nan;
    }
    return r;
}

}  // namespace folio
