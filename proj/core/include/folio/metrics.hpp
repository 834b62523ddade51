#pragma once

#include <span>

#include "folio/trainer.hpp"

namespace folio {

struct MetricReport {
    double fapv = 0.0;
    double mdd = 0.0;
    /// Mean / population std of rho_t - rho_F with rho_F = 0 (rho_t = V_t / V_{t-1}).
    double sharpe = 0.0;
    /// Same ratio on per-step excess returns rho_t - 1.
    double sharpe_excess = 0.0;
    std::size_t n_steps = 0;

    bool operator==(const MetricReport&) const = default;
};

// Value-series forms: `values` is [V_0, V_1^f, ..., V_T^f].

double fapv(std::span<const double> values);
/// Largest (V_t - V_tau) / V_t over t < tau, via a running peak; 0 if never declining.
double mdd(std::span<const double> values);
/// mean(rho - rho_free) / std(rho - rho_free), population (1/N) std.
/// Throws Error{TooShort} with fewer than two returns, Error{ZeroVariance} if all equal.
double sharpe(std::span<const double> values, double rho_free = 0.0);

/// V_T^f / V0. Throws Error{EmptyTrajectory}.
double fapv(const Trajectory& traj, double initial_value);
double mdd(const Trajectory& traj);
double sharpe(const Trajectory& traj, double rho_free = 0.0);

/// All metrics for a trajectory. Sharpe fields are NaN when undefined (too short or
/// zero variance) rather than throwing, so degenerate backtests still report.
MetricReport compute_metrics(const Trajectory& traj);

}  // namespace folio
