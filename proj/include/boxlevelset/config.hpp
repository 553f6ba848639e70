#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "boxlevelset/energy.hpp"
#include "boxlevelset/evolve.hpp"

namespace boxlevelset {

/// Everything a segmentation run can be configured with.
///
/// Text form: one `key = value` per line, `#` starts a comment. Keys are the
/// field names of EnergyParams / EvolveConfig plus `enlarge_factor`;
/// `rho_cls` sets the default class weight (or `none`), `rho_cls.<id>` a
/// per-class override.
struct RunConfig {
  EnergyParams energy;
  EvolveConfig evolve;
  double enlarge_factor = 2.0;

  void validate() const;
};

/// Throws ValidationError for an unknown key or unparsable value.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Keys accepted by apply_setting, excluding the `rho_cls.<id>` family.
const std::vector<std::string>& config_keys();

RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Emits every key with round-trip precision.
std::string format_config(const RunConfig& cfg);

}  // namespace boxlevelset
