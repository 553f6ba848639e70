#pragma once

#include <filesystem>
#include <string>

#include "boxlevelset/energy.hpp"

namespace boxlevelset {

/// Renders sigmoid(k phi) as gray levels with the zero-level contour (inside
/// pixels that touch a non-positive 4-neighbour) drawn in red, as an RGB PNG.
void write_snapshot_png(const std::filesystem::path& path, const LevelSetField& phi,
                        const EnergyParams& params);

/// `<instance>_<iter>.png`, iteration zero-padded to five digits.
std::string snapshot_name(const std::string& instance, int iteration);

}  // namespace boxlevelset
