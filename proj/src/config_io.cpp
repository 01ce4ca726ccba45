#include "sagsim/config_io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace sagsim::config {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
  throw std::runtime_error(origin + ": " + message);
}

/// Applies every key of `section` through a dispatch table; anything the
/// table does not know is an error (catches typos early).
void apply_section(const std::string& origin, const std::string& section_name,
                   const json& section,
                   const std::map<std::string, std::function<void(const json&)>>&
                       setters) {
  if (!section.is_object()) {
    fail(origin, "section '" + section_name + "' must be an object");
  }
  for (const auto& [key, value] : section.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) {
      fail(origin, "unknown key '" + section_name + "." + key + "'");
    }
    try {
      it->second(value);
    } catch (const json::exception& e) {
      fail(origin, "bad value for '" + section_name + "." + key + "': " + e.what());
    }
  }
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    std::size_t used = 0;
    values.push_back(std::stod(item, &used));
    if (used != item.size()) {
      throw std::invalid_argument("trailing characters in number '" + item + "'");
    }
  }
  return values;
}

}  // namespace

engine::JonesVector parse_input_state(const std::string& text) {
  if (text == "H") return {1.0, 0.0};
  if (text == "V") return {0.0, 1.0};
  if (text == "D") return engine::linear_polarization(kPi / 4.0);
  if (text == "A") return engine::linear_polarization(-kPi / 4.0);
  if (text.rfind("lin:", 0) == 0) {
    std::string degrees_text = text.substr(4);
    try {
      std::size_t used = 0;
      double degrees = std::stod(degrees_text, &used);
      if (used != degrees_text.size()) throw std::invalid_argument("trailing chars");
      return engine::linear_polarization(degrees * kPi / 180.0);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad linear polarization angle '" + degrees_text +
                                  "' (expected lin:<degrees>)");
    }
  }
  if (text.rfind("custom:", 0) == 0) {
    std::vector<double> parts;
    try {
      parts = parse_numbers(text.substr(7));
    } catch (const std::exception&) {
      parts.clear();
    }
    if (parts.size() != 4) {
      throw std::invalid_argument(
          "custom input state needs four numbers: custom:hRe,hIm,vRe,vIm");
    }
    engine::JonesVector state{{parts[0], parts[1]}, {parts[2], parts[3]}};
    return state.normalized();  // throws on the zero vector
  }
  throw std::invalid_argument("unknown input state '" + text +
                              "' (use H, V, D, A, lin:<degrees> or "
                              "custom:hRe,hIm,vRe,vIm)");
}

RunConfig parse_run_config(const std::string& json_text, const std::string& origin,
                           RunConfig base) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(origin, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(origin, "top level must be an object");

  RunConfig config = std::move(base);
  for (const auto& [section, body] : doc.items()) {
    if (section == "switch") {
      engine::SwitchConfig& sw = config.switch_config;
      apply_section(origin, section, body,
                    {{"v_pi", [&](const json& v) { sw.v_pi = v.get<double>(); }},
                     {"pulse_width",
                      [&](const json& v) { sw.pulse_width = v.get<double>(); }},
                     {"delay_length",
                      [&](const json& v) { sw.delay_length = v.get<double>(); }},
                     {"group_index",
                      [&](const json& v) { sw.group_index = v.get<double>(); }},
                     {"mzs_phase_kl",
                      [&](const json& v) { sw.mzs_phase_kl = v.get<double>(); }},
                     {"loop_loss_db",
                      [&](const json& v) { sw.loop_loss_db = v.get<double>(); }},
                     {"short_arm_transit",
                      [&](const json& v) { sw.short_arm_transit = v.get<double>(); }},
                     {"kl_drift", [&](const json& v) { sw.kl_drift = v.get<bool>(); }},
                     {"loss_d1_db",
                      [&](const json& v) { sw.loss_d1_db = v.get<double>(); }},
                     {"loss_d2_db",
                      [&](const json& v) { sw.loss_d2_db = v.get<double>(); }}});
    } else if (section == "source") {
      experiment::SourceModel& src = config.source;
      apply_section(
          origin, section, body,
          {{"trigger_rate", [&](const json& v) { src.trigger_rate = v.get<double>(); }},
           {"heralded_pair_rate",
            [&](const json& v) { src.heralded_pair_rate = v.get<double>(); }}});
    } else if (section == "detectors") {
      experiment::DetectorModel& det = config.detectors;
      apply_section(
          origin, section, body,
          {{"efficiency", [&](const json& v) { det.efficiency = v.get<double>(); }},
           {"dark_rate", [&](const json& v) { det.dark_rate = v.get<double>(); }},
           {"gate_width", [&](const json& v) { det.gate_width = v.get<double>(); }}});
    } else if (section == "plan") {
      experiment::RunPlan& plan = config.plan;
      apply_section(
          origin, section, body,
          {{"voltages",
            [&](const json& v) { plan.voltages = v.get<std::vector<double>>(); }},
           {"repetitions", [&](const json& v) { plan.repetitions = v.get<int>(); }},
           {"integration_time",
            [&](const json& v) { plan.integration_time = v.get<double>(); }},
           {"seed", [&](const json& v) { plan.seed = v.get<std::uint64_t>(); }},
           {"input_state",
            [&](const json& v) {
              plan.input_state = parse_input_state(v.get<std::string>());
            }},
           {"pulse_delay",
            [&](const json& v) { plan.pulse_delay = v.get<double>(); }}});
    } else {
      fail(origin, "unknown section '" + section + "'");
    }
  }

  try {
    engine::validate(config.switch_config);
    experiment::validate(config.source);
    experiment::validate(config.detectors);
  } catch (const std::invalid_argument& e) {
    fail(origin, e.what());
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), path);
}

}  // namespace sagsim::config
