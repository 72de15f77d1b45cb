#pragma once

#include <string>
#include <vector>

#include "tvp/market.hpp"
#include "tvp/montecarlo.hpp"

namespace tvp {

struct RunConfig {
    MarketParams market;
    PensionParams pension;
    SimConfig sim;
};

/// Loads and validates a JSON config. Parse and type errors carry the dotted
/// field path (ConfigError); unknown keys are rejected.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text, const std::string& origin = "config");

/// Applies one "section.key=value" override (CLI --set) on top of the raw
/// JSON text representation of a config.
std::string apply_override(const std::string& json_text, const std::string& assignment);

} // namespace tvp
