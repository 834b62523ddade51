#pragma once

#include <filesystem>
#include <iosfwd>

#include "folio/policy.hpp"

namespace folio {

/// Plain-text policy checkpoint, format version 1:
///
///     folio-checkpoint 1
///     config <n_assets> <window> <kernel_width> <conv1_channels> <conv2_channels>
///     seed <seed>
///     block <name> <decays 0|1> <rank> <dim...>
///     <values, whitespace separated, %.17g>
///     ...
///     end
///
/// Blocks appear in ParamIndex order; values round-trip exactly.
inline constexpr int kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const PolicyParams& params);
PolicyParams read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params);
PolicyParams load_checkpoint(const std::filesystem::path& path);

}  // namespace folio
