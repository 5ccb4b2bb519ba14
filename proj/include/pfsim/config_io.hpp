// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pfsim/scenario.hpp"

namespace pfsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses the sectioned key-value scenario format. Unknown sections or keys
/// are rejected by name with the offending line number.
ScenarioConfig parse_config_text(const std::string& text, const std::string& origin);
ScenarioConfig parse_config_file(const std::string& path);

/// Applies one "section.key=value" override on top of a parsed config.
void apply_override(ScenarioConfig& config, const std::string& spec);

/// Renders the fully-resolved config in the same format parse accepts, so a
/// manifest written this way reproduces the run exactly.
std::string serialize_config(const ScenarioConfig& config);

/// One documentation line per config key (for --help-config).
std::string config_schema_help();

}  // namespace pfsim
