// sagsim — command-line surface for the Sagnac switch simulator.
//
// Commands: sweep, delay-scan, netlist emit-preset|validate|canonicalize,
// analyze. Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sagsim/config_io.hpp"
#include "sagsim/engine.hpp"
#include "sagsim/experiment.hpp"
#include "sagsim/netlist.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

constexpr const char* kSweepHeader =
    "voltage_V,mean_c1,std_c1,mean_c2,std_c2,p1_analytic,p2_analytic";
constexpr const char* kDelayHeader = "delay_s,mean_c1,std_c1,phi_cw,phi_ccw";

std::string format_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

/// Round a double to what its %.9g rendering parses back to, so summaries
/// computed from a table agree byte-for-byte with summaries recomputed
/// from the written file.
double quantize(double value) { return std::strtod(format_number(value).c_str(), nullptr); }

/// Seconds with optional SI suffix: "32ns", "1.5us", "10ms", "0.5s", "2e-8".
double parse_seconds(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (end == begin) throw std::invalid_argument("not a duration: '" + text + "'");
  std::string suffix(end);
  if (suffix == "" || suffix == "s") return value;
  if (suffix == "ms") return value * 1e-3;
  if (suffix == "us") return value * 1e-6;
  if (suffix == "ns") return value * 1e-9;
  throw std::invalid_argument("unknown time suffix '" + suffix + "' in '" + text +
                              "' (use s, ms, us or ns)");
}

std::uint64_t default_seed_from_env() {
  const char* env = std::getenv("SAGSIM_SEED");
  if (!env || *env == '\0') return 1;
  char* end = nullptr;
  unsigned long long value = std::strtoull(env, &end, 10);
  if (*end != '\0') {
    throw std::invalid_argument(std::string("SAGSIM_SEED is not an integer: '") + env +
                                "'");
  }
  return value;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spill(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << content;
  if (!out) throw std::runtime_error(path + ": write failed");
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string config_path;
  std::string input_state;
  std::string out_path;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  bool quick = false;
};

/// Quantized view of the settings table — the values actually written.
struct TableRow {
  double voltage, mean_c1, std_c1, mean_c2, std_c2, p1, p2;
};

struct Summary {
  double visibility = 0.0;
  double extinction_db = 0.0;
  std::optional<double> fitted_v_pi;
  double fit_amplitude = 0.0;
  double fit_offset = 0.0;
  double fit_visibility = 0.0;
};

/// Summary statistics recomputed from the (quantized) table rows, used by
/// both `sweep` and `analyze` so the two always agree.
Summary summarize_rows(const std::vector<TableRow>& rows) {
  Summary summary;
  const TableRow* brightest = &rows.front();
  for (const TableRow& row : rows) {
    if (row.mean_c1 > brightest->mean_c1) brightest = &row;
  }
  double total = brightest->mean_c1 + brightest->mean_c2;
  summary.visibility =
      total > 0.0 ? sagsim::experiment::visibility(brightest->mean_c1,
                                                   brightest->mean_c2)
                  : 0.0;
  summary.extinction_db = sagsim::experiment::extinction_ratio_db(summary.visibility);

  std::vector<double> distinct;
  std::vector<std::pair<double, double>> points;
  for (const TableRow& row : rows) {
    distinct.push_back(row.voltage);
    points.emplace_back(row.voltage, row.mean_c1);
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() >= 5) {
    sagsim::experiment::FringeFit fit = sagsim::experiment::fit_fringe(points);
    summary.fitted_v_pi = fit.v_pi;
    summary.fit_amplitude = fit.amplitude;
    summary.fit_offset = fit.offset;
    summary.fit_visibility = fit.visibility;
  }
  return summary;
}

std::string render_sweep_csv(const std::vector<TableRow>& rows,
                             const Summary& summary) {
  std::ostringstream out;
  out << kSweepHeader << "\n";
  for (const TableRow& row : rows) {
    out << format_number(row.voltage) << "," << format_number(row.mean_c1) << ","
        << format_number(row.std_c1) << "," << format_number(row.mean_c2) << ","
        << format_number(row.std_c2) << "," << format_number(row.p1) << ","
        << format_number(row.p2) << "\n";
  }
  out << "# visibility = " << format_number(summary.visibility) << "\n";
  out << "# extinction_db = " << format_number(summary.extinction_db) << "\n";
  out << "# fitted_v_pi = "
      << (summary.fitted_v_pi ? format_number(*summary.fitted_v_pi) : "none") << "\n";
  return out.str();
}

std::string render_sweep_json(const std::vector<TableRow>& rows,
                              const Summary& summary) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["settings"] = nlohmann::json::array();
  for (const TableRow& row : rows) {
    doc["settings"].push_back({{"voltage_V", row.voltage},
                               {"mean_c1", row.mean_c1},
                               {"std_c1", row.std_c1},
                               {"mean_c2", row.mean_c2},
                               {"std_c2", row.std_c2},
                               {"p1_analytic", row.p1},
                               {"p2_analytic", row.p2}});
  }
  doc["summary"]["visibility"] = summary.visibility;
  doc["summary"]["extinction_db"] = summary.extinction_db;
  if (summary.fitted_v_pi) {
    doc["summary"]["fitted_v_pi"] = *summary.fitted_v_pi;
  } else {
    doc["summary"]["fitted_v_pi"] = nullptr;
  }
  return doc.dump(2) + "\n";
}

int run_sweep(const SweepArgs& args) {
  sagsim::config::RunConfig config;
  try {
    // The environment seed is only a default; an explicit config key or
    // the --seed flag both take precedence.
    config.plan.seed = default_seed_from_env();
    if (!args.config_path.empty()) {
      config = sagsim::config::parse_run_config(slurp(args.config_path),
                                                args.config_path, config);
    }
    if (args.seed) config.plan.seed = *args.seed;
    if (!args.input_state.empty()) {
      config.plan.input_state = sagsim::config::parse_input_state(args.input_state);
    }
    if (args.quick) {
      config.plan.repetitions = 3;
      config.plan.integration_time = 1.0;
    }
    sagsim::engine::validate(config.switch_config);
  } catch (const std::exception& e) {
    std::cerr << "sagsim sweep: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    sagsim::experiment::ExperimentResult result = sagsim::experiment::run_voltage_sweep(
        config.switch_config, config.source, config.detectors, config.plan);
    std::vector<TableRow> rows;
    rows.reserve(result.settings.size());
    for (const auto& s : result.settings) {
      rows.push_back({quantize(s.voltage), quantize(s.mean_c1), quantize(s.std_c1),
                      quantize(s.mean_c2), quantize(s.std_c2), quantize(s.p1_analytic),
                      quantize(s.p2_analytic)});
    }
    Summary summary = summarize_rows(rows);
    std::string rendered = args.format == "json" ? render_sweep_json(rows, summary)
                                                 : render_sweep_csv(rows, summary);
    if (args.out_path.empty() || args.out_path == "-") {
      std::cout << rendered;
    } else {
      spill(args.out_path, rendered);
    }
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "sagsim sweep: " << e.what() << "\n";
    return kRuntimeError;
  }
}

// ---------------------------------------------------------------------------
// delay-scan

struct DelayScanArgs {
  std::string config_path;
  std::string input_state;
  std::string out_path;
  std::string from_text = "-30ns";
  std::string to_text = "520ns";
  std::string step_text = "10ns";
  double voltage = 4.0;
  std::optional<std::uint64_t> seed;
  bool quick = false;
};

int run_delay_scan(const DelayScanArgs& args) {
  sagsim::config::RunConfig config;
  std::vector<double> delays;
  try {
    config.plan.seed = default_seed_from_env();
    if (!args.config_path.empty()) {
      config = sagsim::config::parse_run_config(slurp(args.config_path),
                                                args.config_path, config);
    }
    if (args.seed) config.plan.seed = *args.seed;
    if (!args.input_state.empty()) {
      config.plan.input_state = sagsim::config::parse_input_state(args.input_state);
    }
    if (args.quick) {
      config.plan.repetitions = 3;
      config.plan.integration_time = 1.0;
    }
    double from = parse_seconds(args.from_text);
    double to = parse_seconds(args.to_text);
    double step = parse_seconds(args.step_text);
    if (!(step > 0.0)) throw std::invalid_argument("--step must be positive");
    if (!(from < to)) throw std::invalid_argument("--from must precede --to");
    auto count = static_cast<std::size_t>((to - from) / step + 1e-9) + 1;
    for (std::size_t i = 0; i < count; ++i) {
      delays.push_back(from + static_cast<double>(i) * step);
    }
    sagsim::engine::validate(config.switch_config);
  } catch (const std::exception& e) {
    std::cerr << "sagsim delay-scan: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    std::vector<sagsim::experiment::DelayScanPoint> points =
        sagsim::experiment::run_delay_scan(config.switch_config, config.source,
                                           config.detectors, delays, args.voltage,
                                           config.plan);
    std::ostringstream out;
    out << kDelayHeader << "\n";
    for (const auto& p : points) {
      out << format_number(p.delay) << "," << format_number(quantize(p.mean_c1)) << ","
          << format_number(quantize(p.std_c1)) << "," << format_number(p.phi_cw) << ","
          << format_number(p.phi_ccw) << "\n";
    }
    if (args.out_path.empty() || args.out_path == "-") {
      std::cout << out.str();
    } else {
      spill(args.out_path, out.str());
    }
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "sagsim delay-scan: " << e.what() << "\n";
    return kRuntimeError;
  }
}

// ---------------------------------------------------------------------------
// netlist

int run_emit_preset(const std::string& config_path, const std::string& out_path) {
  try {
    sagsim::engine::SwitchConfig switch_config;
    if (!config_path.empty()) {
      switch_config = sagsim::config::load_run_config(config_path).switch_config;
    }
    std::string text = sagsim::netlist::serialize(sagsim::netlist::sagnac_preset(switch_config));
    if (out_path.empty() || out_path == "-") {
      std::cout << text;
    } else {
      spill(out_path, text);
    }
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "sagsim netlist emit-preset: " << e.what() << "\n";
    return kUsageError;
  }
}

int run_validate(const std::string& path) {
  try {
    sagsim::netlist::ParseResult parsed = sagsim::netlist::parse(slurp(path));
    for (const auto& diag : parsed.diagnostics) {
      std::cerr << sagsim::netlist::format_diagnostic(path, diag) << "\n";
    }
    return parsed.ok() ? kOk : kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "sagsim netlist validate: " << e.what() << "\n";
    return kUsageError;
  }
}

int run_canonicalize(const std::string& path) {
  try {
    sagsim::netlist::ParseResult parsed = sagsim::netlist::parse(slurp(path));
    for (const auto& diag : parsed.diagnostics) {
      std::cerr << sagsim::netlist::format_diagnostic(path, diag) << "\n";
    }
    if (!parsed.ok()) return kUsageError;
    spill(path, sagsim::netlist::serialize(*parsed.netlist));
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "sagsim netlist canonicalize: " << e.what() << "\n";
    return kUsageError;
  }
}

// ---------------------------------------------------------------------------
// analyze

int run_analyze(const std::string& results_path, const std::string& out_path) {
  std::vector<TableRow> rows;
  try {
    std::istringstream in(slurp(results_path));
    std::string line;
    if (!std::getline(in, line) || line != kSweepHeader) {
      throw std::runtime_error(results_path +
                               ": schema mismatch: expected sweep CSV header '" +
                               kSweepHeader + "'");
    }
    int line_number = 1;
    while (std::getline(in, line)) {
      ++line_number;
      if (line.empty() || line[0] == '#') continue;
      std::stringstream fields(line);
      std::string field;
      std::vector<double> values;
      while (std::getline(fields, field, ',')) {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument("bad number");
      }
      if (values.size() != 7) throw std::invalid_argument("bad column count");
      rows.push_back({values[0], values[1], values[2], values[3], values[4], values[5],
                      values[6]});
    }
    if (rows.empty()) throw std::runtime_error(results_path + ": no data rows");
  } catch (const std::invalid_argument& e) {
    std::cerr << "sagsim analyze: " << results_path << ": malformed row: " << e.what()
              << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "sagsim analyze: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    Summary summary = summarize_rows(rows);
    std::ostringstream out;
    out << "# visibility = " << format_number(summary.visibility) << "\n";
    out << "# extinction_db = " << format_number(summary.extinction_db) << "\n";
    out << "# fitted_v_pi = "
        << (summary.fitted_v_pi ? format_number(*summary.fitted_v_pi) : "none") << "\n";
    if (out_path.empty() || out_path == "-") {
      std::cout << out.str();
    } else {
      spill(out_path, out.str());
    }
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "sagsim analyze: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator of a polarization-independent fiber Sagnac "
               "single-photon switch"};
  app.require_subcommand(1);

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep", "Voltage sweep with fringe summary");
  sweep->add_option("--config", sweep_args.config_path, "JSON run configuration");
  sweep->add_option("--input-state", sweep_args.input_state,
                    "H, V, D, A, lin:<degrees> or custom:hRe,hIm,vRe,vIm");
  sweep->add_option("--out", sweep_args.out_path, "Output path ('-' for stdout)");
  sweep->add_option("--format", sweep_args.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--seed", sweep_args.seed, "Override the master seed");
  sweep->add_flag("--quick", sweep_args.quick, "3 repetitions of 1 s (CI speed)");

  DelayScanArgs delay_args;
  CLI::App* delay = app.add_subcommand("delay-scan",
                                       "Scan the drive-pulse delay at fixed voltage");
  delay->add_option("--config", delay_args.config_path, "JSON run configuration");
  delay->add_option("--input-state", delay_args.input_state,
                    "H, V, D, A, lin:<degrees> or custom:hRe,hIm,vRe,vIm");
  delay->add_option("--voltage", delay_args.voltage, "Drive voltage, volts");
  delay->add_option("--from", delay_args.from_text, "Scan start (s, ms, us, ns)");
  delay->add_option("--to", delay_args.to_text, "Scan end");
  delay->add_option("--step", delay_args.step_text, "Scan step");
  delay->add_option("--out", delay_args.out_path, "Output path ('-' for stdout)");
  delay->add_option("--seed", delay_args.seed, "Override the master seed");
  delay->add_flag("--quick", delay_args.quick, "3 repetitions of 1 s (CI speed)");

  CLI::App* netlist = app.add_subcommand("netlist", "Work with .sagnet circuit files");
  netlist->require_subcommand(1);
  std::string emit_config_path, emit_out_path;
  CLI::App* emit = netlist->add_subcommand("emit-preset",
                                           "Write the built-in switch topology");
  emit->add_option("--config", emit_config_path, "Take fiber/loss values from here");
  emit->add_option("--out", emit_out_path, "Output path ('-' for stdout)");
  std::string validate_path;
  CLI::App* validate_cmd = netlist->add_subcommand("validate", "Check a netlist file");
  validate_cmd->add_option("file", validate_path, "Netlist to check")->required();
  std::string canonicalize_path;
  CLI::App* canonicalize_cmd =
      netlist->add_subcommand("canonicalize", "Rewrite a netlist in canonical form");
  canonicalize_cmd->add_option("file", canonicalize_path, "Netlist to rewrite")
      ->required();

  std::string analyze_results, analyze_out;
  CLI::App* analyze = app.add_subcommand("analyze",
                                         "Recompute the summary from a sweep CSV");
  analyze->add_option("results", analyze_results, "CSV produced by sweep")->required();
  analyze->add_option("--out", analyze_out, "Summary path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  if (sweep->parsed()) return run_sweep(sweep_args);
  if (delay->parsed()) return run_delay_scan(delay_args);
  if (netlist->parsed()) {
    if (emit->parsed()) return run_emit_preset(emit_config_path, emit_out_path);
    if (validate_cmd->parsed()) return run_validate(validate_path);
    if (canonicalize_cmd->parsed()) return run_canonicalize(canonicalize_path);
  }
  if (analyze->parsed()) return run_analyze(analyze_results, analyze_out);
  return kUsageError;
}
