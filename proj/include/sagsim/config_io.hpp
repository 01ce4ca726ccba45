#pragma once

#include <string>

#include "sagsim/engine.hpp"
#include "sagsim/experiment.hpp"

namespace sagsim::config {

/// Everything a run needs, bundled for the CLI. The JSON document mirrors
/// this shape: sections "switch", "source", "detectors", "plan", each key
/// named exactly like the corresponding struct field. Times are seconds,
/// angles radians, losses dB. Missing sections or keys keep the defaults;
/// unknown ones are rejected.
struct RunConfig {
  engine::SwitchConfig switch_config;
  experiment::SourceModel source;
  experiment::DetectorModel detectors;
  experiment::RunPlan plan;
};

/// Parses a JSON document. `origin` labels error messages (a path or
/// "<inline>"). Keys present in the document override `base`; everything
/// else keeps the base value. Throws std::runtime_error naming the
/// offending key on unknown keys, type mismatches, or malformed JSON.
RunConfig parse_run_config(const std::string& json_text, const std::string& origin,
                           RunConfig base = RunConfig{});

/// Reads and parses a config file; throws std::runtime_error on I/O errors.
RunConfig load_run_config(const std::string& path);

/// Input polarization notation used by configs and the CLI:
/// "H", "V", "D", "A", "lin:<degrees>", or "custom:hRe,hIm,vRe,vIm"
/// (normalized automatically). Throws std::invalid_argument otherwise.
engine::JonesVector parse_input_state(const std::string& text);

}  // namespace sagsim::config
