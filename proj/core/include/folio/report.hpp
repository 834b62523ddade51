#pragma once

#include <filesystem>
#include <string>

#include "folio/experiment.hpp"

namespace folio {

inline constexpr const char* kHalfWidthConvention =
    "half_width = 1.96 * sample_std / sqrt(N), sample_std with 1/(N-1); 95% normal CI of the mean; N = 1 reports 0";
inline constexpr const char* kSharpeConvention =
    "sharpe = mean(rho_t) / pop_std(rho_t) with rho_t = V_t / V_{t-1}; sharpe_excess uses rho_t - 1; "
    "population (1/N) std; null when undefined";

/// Structured campaign summary. Per-run records, aggregates and conventions; NaN
/// serializes as null.
std::string summary_json(const CampaignReport& report);
/// Inverse of summary_json for everything it contains (trajectories, logs and wall
/// time are not part of the summary).
CampaignReport parse_summary_json(const std::string& text);

/// True when the two reports have bitwise-identical summary content.
bool same_summary(const CampaignReport& a, const CampaignReport& b);

/// Writes into `out_dir`:
///   summary.json                 structured summary
///   runs.csv                     one row per run
///   fapv_<method>.csv            successful-run FAPVs, one per line
///   config.txt                   resolved config plus the seed list
///   timings.csv                  wall time per run
///   trajectories/<m>_seed<k>.csv step, value, reward, weights
///   logs/<m>_seed<k>_loss.csv, logs/<m>_seed<k>_validation.csv
/// An empty or all-failed report throws Error{AllRunsFailed} before anything is written.
void emit_report(const CampaignReport& report, const std::filesystem::path& out_dir);

/// Re-reads summary.json, recomputes aggregates from the run records and rewrites
/// summary.json, runs.csv and the FAPV sample lists.
CampaignReport regenerate_report(const std::filesystem::path& campaign_dir);

/// Human-readable table: mean ± half-width of FAPV, MDD and Sharpe per method,
/// followed by the max FAPV per method.
std::string format_table(const CampaignReport& report);

}  // namespace folio
