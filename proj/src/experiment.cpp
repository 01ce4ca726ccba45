#include "sagsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "sagsim/components.hpp"

namespace sagsim::experiment {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

/// Runs fn(i) for i in [0, n) across a bounded set of worker threads.
/// Work items must be independent and write only to their own slots, so
/// the schedule cannot reorder anything observable.
template <typename Fn>
void parallel_for_index(std::size_t n, Fn&& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = std::min<std::size_t>(n, hw == 0 ? 4 : hw);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_and_sample_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return out;
}

/// Statistics of one drive setting (a voltage or a delay) over the plan's
/// repetitions. setting_index keys the random streams.
SettingStats collect_setting(const engine::SwitchConfig& config,
                             const SourceModel& source, const DetectorModel& detector,
                             const engine::DrivePulse& pulse, const RunPlan& plan,
                             std::uint64_t setting_index) {
  SettingStats stats;
  stats.voltage = pulse.voltage;
  auto reps = static_cast<std::size_t>(plan.repetitions);
  stats.windows.reserve(reps);
  std::vector<double> c1s, c2s;
  c1s.reserve(reps);
  c2s.reserve(reps);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    rng::Stream stream = rng::Stream::for_trial(plan.seed, setting_index, rep);
    WindowCounts counts = simulate_window(config, source, detector, pulse,
                                          plan.input_state, plan.integration_time,
                                          stream);
    c1s.push_back(static_cast<double>(counts.c1));
    c2s.push_back(static_cast<double>(counts.c2));
    stats.windows.push_back(counts);
  }
  MeanStd m1 = mean_and_sample_std(c1s);
  MeanStd m2 = mean_and_sample_std(c2s);
  stats.mean_c1 = m1.mean;
  stats.std_c1 = m1.std;
  stats.mean_c2 = m2.mean;
  stats.std_c2 = m2.std;

  engine::PassPhases phases = engine::applied_phases(config, pulse);
  engine::DetectionProbabilities probs =
      engine::detection_probabilities(config, plan.input_state, phases);
  stats.p1_analytic = probs.p1;
  stats.p2_analytic = probs.p2;
  return stats;
}

void validate_plan(const RunPlan& plan) {
  require(plan.repetitions >= 1, "repetitions must be at least 1");
  require(plan.integration_time > 0.0, "integration_time must be positive");
}

}  // namespace

void validate(const SourceModel& source) {
  require(source.trigger_rate > 0.0, "trigger_rate must be positive");
  require(source.heralded_pair_rate >= 0.0, "heralded_pair_rate must be non-negative");
  require(source.heralded_pair_rate <= source.trigger_rate,
          "heralded_pair_rate cannot exceed trigger_rate");
}

void validate(const DetectorModel& detector) {
  require(detector.efficiency >= 0.0 && detector.efficiency <= 1.0,
          "efficiency must lie in [0, 1]");
  require(detector.dark_rate >= 0.0, "dark_rate must be non-negative");
  require(detector.gate_width > 0.0, "gate_width must be positive");
}

std::vector<double> default_voltages() {
  std::vector<double> voltages;
  for (int i = 0; i <= 16; ++i) voltages.push_back(0.5 * i);
  return voltages;
}

WindowCounts simulate_window(double p1, double p2, const SourceModel& source,
                             const DetectorModel& detector, double integration_time,
                             rng::Stream& stream) {
  validate(source);
  validate(detector);
  require(integration_time > 0.0, "integration_time must be positive");
  require(p1 >= 0.0 && p2 >= 0.0 && p1 + p2 <= 1.0 + 1e-12,
          "arrival probabilities must satisfy 0 <= p1, p2 and p1 + p2 <= 1");

  double pair_probability = source.heralded_pair_rate / source.trigger_rate;
  double q1 = pair_probability * p1 * detector.efficiency;
  double q2 = pair_probability * p2 * detector.efficiency;

  WindowCounts counts;
  counts.heralds = rng::poisson(stream, source.trigger_rate * integration_time);
  for (std::uint64_t i = 0; i < counts.heralds; ++i) {
    double u = stream.next_unit();
    if (u < q1) {
      ++counts.c1;
    } else if (u < q1 + q2) {
      ++counts.c2;
    }
    // otherwise the photon was lost or missed; the gate stays silent
  }
  double gated_seconds = detector.gate_width * static_cast<double>(counts.heralds);
  counts.c1 += rng::poisson(stream, detector.dark_rate * gated_seconds);
  counts.c2 += rng::poisson(stream, detector.dark_rate * gated_seconds);
  return counts;
}

WindowCounts simulate_window(const engine::SwitchConfig& config,
                             const SourceModel& source, const DetectorModel& detector,
                             const engine::DrivePulse& pulse,
                             const engine::JonesVector& input, double integration_time,
                             rng::Stream& stream) {
  engine::SwitchConfig cfg = config;
  if (cfg.kl_drift) {
    cfg.mzs_phase_kl = stream.next_uniform(0.0, 2.0 * kPi);
  }
  engine::PassPhases phases = engine::applied_phases(cfg, pulse);
  engine::DetectionProbabilities probs =
      engine::detection_probabilities(cfg, input, phases, /*include_loss=*/true);
  return simulate_window(probs.p1, probs.p2, source, detector, integration_time,
                         stream);
}

ExperimentResult run_voltage_sweep(const engine::SwitchConfig& config,
                                   const SourceModel& source,
                                   const DetectorModel& detector, const RunPlan& plan) {
  engine::validate(config);
  validate(source);
  validate(detector);
  validate_plan(plan);
  require(!plan.voltages.empty(), "plan must list at least one voltage");
  double delay = plan.resolved_pulse_delay(config);

  ExperimentResult result;
  result.settings.resize(plan.voltages.size());
  parallel_for_index(plan.voltages.size(), [&](std::size_t i) {
    engine::DrivePulse pulse{delay, config.pulse_width, plan.voltages[i]};
    result.settings[i] = collect_setting(config, source, detector, pulse, plan, i);
  });

  const SettingStats* brightest = &result.settings.front();
  for (const SettingStats& s : result.settings) {
    if (s.mean_c1 > brightest->mean_c1) brightest = &s;
  }
  double total = brightest->mean_c1 + brightest->mean_c2;
  result.visibility = total > 0.0 ? visibility(brightest->mean_c1, brightest->mean_c2)
                                  : 0.0;
  result.extinction_db = extinction_ratio_db(result.visibility);

  std::vector<double> distinct = plan.voltages;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() >= 5) {
    try {
      result.fit = fit_fringe(result);
    } catch (const FitError&) {
      result.fit = FringeFit{};  // v_pi stays 0: no usable fringe
    }
  }
  return result;
}

std::vector<DelayScanPoint> run_delay_scan(const engine::SwitchConfig& config,
                                           const SourceModel& source,
                                           const DetectorModel& detector,
                                           const std::vector<double>& delays,
                                           double voltage, const RunPlan& plan) {
  engine::validate(config);
  validate(source);
  validate(detector);
  validate_plan(plan);
  require(!delays.empty(), "delay scan needs at least one delay");

  std::vector<DelayScanPoint> points(delays.size());
  parallel_for_index(delays.size(), [&](std::size_t i) {
    engine::DrivePulse pulse{delays[i], config.pulse_width, voltage};
    SettingStats stats = collect_setting(config, source, detector, pulse, plan, i);
    engine::PassPhases phases = engine::applied_phases(config, pulse);
    points[i] = {delays[i],    stats.mean_c1, stats.std_c1, stats.mean_c2,
                 stats.std_c2, phases.cw,     phases.ccw};
  });
  return points;
}

double visibility(double c1, double c2) {
  double total = c1 + c2;
  if (total <= 0.0) {
    throw std::invalid_argument("visibility needs a positive total count");
  }
  return (c1 - c2) / total;
}

double extinction_ratio_db(double visibility) {
  if (visibility >= 1.0) return std::numeric_limits<double>::infinity();
  if (visibility <= -1.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10((1.0 + visibility) / (1.0 - visibility));
}

namespace {

/// Closed-form least squares for counts = A * f + B at fixed v_pi, where
/// f = cos^2(pi v / (2 v_pi)). Returns the RMS residual.
double fringe_least_squares(const std::vector<std::pair<double, double>>& points,
                            double v_pi, double& amplitude, double& offset) {
  double sf = 0.0, sff = 0.0, sy = 0.0, sfy = 0.0;
  auto n = static_cast<double>(points.size());
  for (const auto& [voltage, count] : points) {
    double c = std::cos(kPi * voltage / (2.0 * v_pi));
    double f = c * c;
    sf += f;
    sff += f * f;
    sy += count;
    sfy += f * count;
  }
  double det = sff * n - sf * sf;
  if (std::abs(det) < 1e-12) {
    amplitude = 0.0;
    offset = sy / n;
  } else {
    amplitude = (sfy * n - sf * sy) / det;
    offset = (sff * sy - sf * sfy) / det;
  }
  double ss = 0.0;
  for (const auto& [voltage, count] : points) {
    double c = std::cos(kPi * voltage / (2.0 * v_pi));
    double model = amplitude * c * c + offset;
    ss += (count - model) * (count - model);
  }
  return std::sqrt(ss / n);
}

}  // namespace

FringeFit fit_fringe(const std::vector<std::pair<double, double>>& points) {
  std::vector<double> voltages;
  voltages.reserve(points.size());
  double count_min = std::numeric_limits<double>::infinity();
  double count_max = -std::numeric_limits<double>::infinity();
  for (const auto& [voltage, count] : points) {
    voltages.push_back(voltage);
    count_min = std::min(count_min, count);
    count_max = std::max(count_max, count);
  }
  std::sort(voltages.begin(), voltages.end());
  voltages.erase(std::unique(voltages.begin(), voltages.end()), voltages.end());
  require(voltages.size() >= 5, "fit_fringe needs at least five distinct voltages");
  if (count_max - count_min <= 0.0) {
    throw FitError("fit_fringe: counts are constant; no fringe to fit");
  }

  // Coarse scan over plausible half-wave voltages...
  double best_v = 1.0;
  double best_rms = std::numeric_limits<double>::infinity();
  double a = 0.0, b = 0.0;
  for (double v = 1.0; v <= 10.0 + 1e-9; v += 0.01) {
    double rms = fringe_least_squares(points, v, a, b);
    if (rms < best_rms) {
      best_rms = rms;
      best_v = v;
    }
  }
  // ...then golden-section refinement inside the winning bracket.
  constexpr double kGolden = 0.6180339887498949;
  double lo = std::max(0.5, best_v - 0.01), hi = std::min(10.5, best_v + 0.01);
  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double f1 = fringe_least_squares(points, x1, a, b);
  double f2 = fringe_least_squares(points, x2, a, b);
  for (int iter = 0; iter < 80 && hi - lo > 1e-10; ++iter) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = fringe_least_squares(points, x1, a, b);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = fringe_least_squares(points, x2, a, b);
    }
  }
  FringeFit fit;
  fit.v_pi = 0.5 * (lo + hi);
  fit.rms_residual = fringe_least_squares(points, fit.v_pi, fit.amplitude, fit.offset);
  if (fit.amplitude <= 0.0) {
    throw FitError("fit_fringe: no positive fringe amplitude found");
  }
  double denom = fit.amplitude + 2.0 * fit.offset;
  fit.visibility = denom != 0.0 ? fit.amplitude / denom : 0.0;
  return fit;
}

FringeFit fit_fringe(const ExperimentResult& result) {
  std::vector<std::pair<double, double>> points;
  points.reserve(result.settings.size());
  for (const SettingStats& s : result.settings) {
    points.emplace_back(s.voltage, s.mean_c1);
  }
  return fit_fringe(points);
}

double expected_rate(const SourceModel& source, const DetectorModel& detector,
                     const engine::SwitchConfig& config) {
  // At phi = 0 the whole heralded flux heads to D1, attenuated by the arm.
  double arm_transmission = components::attenuation_power(config.effective_loss_d1());
  return expected_count(source, detector, 1.0, arm_transmission);
}

double expected_count(const SourceModel& source, const DetectorModel& detector,
                      double integration_time, double detected_probability) {
  double signal =
      source.heralded_pair_rate * detected_probability * detector.efficiency;
  double dark = source.trigger_rate * detector.dark_rate * detector.gate_width;
  return integration_time * (signal + dark);
}

}  // namespace sagsim::experiment
