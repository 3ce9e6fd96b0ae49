#pragma once

#include <string>

#include "hpmc/experiment.hpp"

namespace hpmc {

// Flat key=value configuration text: one assignment per line, '#' starts a
// comment, blank lines ignored, keys use dotted section names
// (experiment.*, arm.*, planner.*, stack.*). Unknown keys are errors.

// Parses `text` on top of `base`, returning the updated configuration.
ExperimentConfig parse_config(const std::string& text, const ExperimentConfig& base);

// Reads a configuration file on top of the library defaults.
ExperimentConfig load_config(const std::string& path);

// Applies one "dotted.key=value" assignment in place.
void apply_override(ExperimentConfig* config, const std::string& assignment);

// Every recognized key with its current value, one per line, in schema order.
std::string config_to_text(const ExperimentConfig& config);

// Human-readable key list: name, default value and meaning of each key.
std::string config_schema();

}  // namespace hpmc
