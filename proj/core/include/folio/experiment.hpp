#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "folio/config.hpp"
#include "folio/metrics.hpp"

namespace folio {

/// Train and test markets for one normalization method.
struct MethodMarkets {
    NormalizationScheme scheme;
    Market train;
    Market test;
};

/// Loads the manifest's assets and aligns them (config alignment overrides the manifest).
MarketFrame load_campaign_frame(const ExperimentConfig& config);

/// Splits `frame` and builds both markets; data_max is fitted on the training rows only.
MethodMarkets prepare_markets(const ExperimentConfig& config, const MarketFrame& frame, NormalizationKind method);

struct ValidationRecord {
    std::size_t step = 0;
    double fapv = 0.0;  // pure test-period evaluation, no online learning
};

struct RunResult {
    NormalizationKind method = NormalizationKind::last_close;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    MetricReport metrics;
    /// Relative to the campaign directory.
    std::string trajectory_file;
    double wall_seconds = 0.0;
    /// Fitted data_max scales by ticker; empty for state normalizations.
    std::vector<std::pair<std::string, double>> scales;

    Trajectory trajectory;
    std::vector<LossRecord> loss_log;
    std::vector<ValidationRecord> validation;
};

std::string trajectory_file_name(NormalizationKind method, std::uint64_t seed);

/// The whole pipeline for one (method, seed). Failures are captured in the result.
RunResult run_single(const ExperimentConfig& config, const MarketFrame& frame, NormalizationKind method,
                     std::uint64_t seed);

struct Aggregate {
    double mean = 0.0;
    /// 1.96 * sample std (1 / (N - 1)) / sqrt(N).
    double half_width = 0.0;
    std::size_t n = 0;
    /// N == 1: half_width is reported as 0.
    bool single_sample = false;

    bool operator==(const Aggregate&) const = default;
};

/// Requires at least one value.
Aggregate aggregate(std::span<const double> values);

struct MethodSummary {
    NormalizationKind method = NormalizationKind::last_close;
    /// Sorted by seed; failed runs are kept but excluded from the aggregates.
    std::vector<RunResult> runs;
    Aggregate fapv;
    Aggregate mdd;
    /// Over runs whose Sharpe ratio is defined.
    Aggregate sharpe;
    Aggregate sharpe_excess;
    double max_fapv = 0.0;
    std::size_t failed = 0;

    std::vector<double> fapv_samples() const;
};

struct CampaignReport {
    std::vector<MethodSummary> methods;
    std::size_t failed_runs = 0;
    std::vector<std::uint64_t> seeds;
    /// Resolved config (render_config).
    std::string config_text;
};

/// Pure function of the runs: groups by method in first-seen order, sorts by seed
/// and recomputes every aggregate. Throws Error{AllRunsFailed} if nothing succeeded.
CampaignReport assemble_report(std::vector<RunResult> runs, std::string config_text = {});
MethodSummary summarize_method(NormalizationKind method, std::vector<RunResult> runs);

struct CampaignOptions {
    std::size_t workers = 1;
    /// Called from the worker thread as each run finishes (serialized by a mutex).
    std::function<void(const RunResult&)> on_run_done;
};

CampaignReport run_campaign(const ExperimentConfig& config, const CampaignOptions& options = {});

}  // namespace folio
