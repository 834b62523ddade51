#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "folio/market_data.hpp"
#include "folio/normalization.hpp"
#include "folio/policy.hpp"
#include "folio/trainer.hpp"

namespace folio {

/// Everything needed to reproduce a campaign. Defaults: lr 5e-5, batch 200, sample
/// bias 0.002, 300000 steps, 30 online steps, window 50, commission 0.0025, initial
/// value 100000, 50 runs.
struct ExperimentConfig {
    std::filesystem::path manifest;
    std::optional<AlignmentPolicy> alignment;  // overrides the manifest's policy
    DateRange train_range{};
    DateRange test_range{};
    std::vector<NormalizationKind> methods{NormalizationKind::last_close, NormalizationKind::last_price,
                                           NormalizationKind::data_max};
    TrainerConfig trainer;
    std::size_t time_window = 50;
    double commission_rate = 0.0025;
    double initial_value = 100000.0;
    std::size_t runs = 50;
    std::uint64_t base_seed = 0;
    /// Pure test-period evaluations logged during training (0 disables).
    std::size_t validation_points = 15;
    std::size_t kernel_width = 3;
    std::size_t conv1_channels = 2;
    std::size_t conv2_channels = 20;

    PolicyConfig policy_config(std::size_t n_assets) const;
    std::uint64_t seed_for_run(std::size_t k) const { return base_seed + k; }
};

/// Parses `key = value` lines (`#` comments). Relative manifest paths resolve
/// against `base_dir`. Unknown keys and invalid values throw Error{InvalidConfig}.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws Error{InvalidConfig} naming the first violated constraint.
void validate_config(const ExperimentConfig& config);

/// Fully resolved config in the same key-value syntax; parse_config(render) == config.
std::string render_config(const ExperimentConfig& config);

}  // namespace folio
