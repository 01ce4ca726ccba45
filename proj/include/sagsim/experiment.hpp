#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sagsim/engine.hpp"
#include "sagsim/rng.hpp"

namespace sagsim::experiment {

/// Heralded single-photon source. Trigger detections open the counting
/// gates; heralded_pair_rate is the rate of partner photons actually
/// delivered into the switch (it cannot exceed the trigger rate).
struct SourceModel {
  double trigger_rate = 529.3;        // heralds per second
  double heralded_pair_rate = 529.3;  // partner photons per second
};

/// Gated single-photon detector (one model shared by D1 and D2). The dark
/// rate applies only while a gate is open, so the dark floor scales with
/// the herald count.
struct DetectorModel {
  double efficiency = 0.15;    // detection probability for an arriving photon
  double dark_rate = 5757.7;   // dark counts per second while gated
  double gate_width = 100e-9;  // gate opened per herald, seconds
};

void validate(const SourceModel& source);
void validate(const DetectorModel& detector);

/// Default sweep grid: 0 to 8 V in 0.5 V steps (17 settings).
std::vector<double> default_voltages();

/// Measurement plan shared by sweeps and delay scans. pulse_delay unset
/// means "center the pulse on the clockwise pass":
/// short_arm_transit - pulse_width / 2.
struct RunPlan {
  std::vector<double> voltages = default_voltages();
  int repetitions = 20;
  double integration_time = 10.0;  // seconds per counting window
  std::uint64_t seed = 1;
  engine::JonesVector input_state;  // defaults to H
  std::optional<double> pulse_delay;

  double resolved_pulse_delay(const engine::SwitchConfig& config) const {
    return pulse_delay.value_or(config.short_arm_transit - config.pulse_width / 2.0);
  }
};

/// Raw counts accumulated over one counting window.
struct WindowCounts {
  std::uint64_t heralds = 0;
  std::uint64_t c1 = 0;  // detector 1 counts, darks included
  std::uint64_t c2 = 0;

  bool operator==(const WindowCounts&) const = default;
};

/// One counting window with explicit arrival probabilities (loss already
/// included): heralds are Poissonian, each heralded photon registers at
/// D_k with probability p_k * efficiency, and every gate may add dark
/// counts. All randomness comes from `stream` in a fixed order, so a given
/// (key, inputs) pair yields the same counts on every platform.
/// Throws std::invalid_argument unless 0 <= p1, p2 and p1 + p2 <= 1.
WindowCounts simulate_window(double p1, double p2, const SourceModel& source,
                             const DetectorModel& detector, double integration_time,
                             rng::Stream& stream);

/// Same, but deriving the probabilities from the switch physics. When
/// config.kl_drift is set the relative structure phase is redrawn
/// uniformly at the start of the window (first draw on the stream).
WindowCounts simulate_window(const engine::SwitchConfig& config,
                             const SourceModel& source, const DetectorModel& detector,
                             const engine::DrivePulse& pulse,
                             const engine::JonesVector& input, double integration_time,
                             rng::Stream& stream);

/// Per-voltage statistics over the repetitions, plus the analytic point.
struct SettingStats {
  double voltage = 0.0;
  double mean_c1 = 0.0;
  double std_c1 = 0.0;  // sample standard deviation across repetitions
  double mean_c2 = 0.0;
  double std_c2 = 0.0;
  double p1_analytic = 0.0;  // lossless routing probability
  double p2_analytic = 0.0;
  std::vector<WindowCounts> windows;  // raw counts, repetition order
};

/// cos^2 fringe fit: counts(v) = amplitude * cos^2(pi v / (2 v_pi)) + offset.
/// v_pi == 0 means no fit was attempted (too few voltages) or it failed.
struct FringeFit {
  double amplitude = 0.0;
  double offset = 0.0;
  double v_pi = 0.0;
  double rms_residual = 0.0;
  double visibility = 0.0;  // amplitude / (amplitude + 2 * offset)
};

struct ExperimentResult {
  std::vector<SettingStats> settings;
  double visibility = 0.0;     // (c1 - c2)/(c1 + c2) at the brightest setting
  double extinction_db = 0.0;  // derived from `visibility`
  FringeFit fit;               // fit of mean_c1 against voltage
};

/// Runs the full sweep. Settings are independent and processed in
/// parallel; each window's stream is keyed by (seed, setting index,
/// repetition index), so the schedule cannot change the numbers.
ExperimentResult run_voltage_sweep(const engine::SwitchConfig& config,
                                   const SourceModel& source,
                                   const DetectorModel& detector, const RunPlan& plan);

/// Scan of the drive-pulse delay at a fixed voltage; maps out when each
/// counter-propagating pass sits inside the pulse window. Uses the plan's
/// repetitions, integration time, seed and input state.
struct DelayScanPoint {
  double delay = 0.0;
  double mean_c1 = 0.0;
  double std_c1 = 0.0;
  double mean_c2 = 0.0;
  double std_c2 = 0.0;
  double phi_cw = 0.0;
  double phi_ccw = 0.0;
};

std::vector<DelayScanPoint> run_delay_scan(const engine::SwitchConfig& config,
                                           const SourceModel& source,
                                           const DetectorModel& detector,
                                           const std::vector<double>& delays,
                                           double voltage, const RunPlan& plan);

/// Fringe contrast between complementary counts: (c1 - c2)/(c1 + c2).
/// Throws std::invalid_argument when c1 + c2 <= 0.
double visibility(double c1, double c2);

/// Switching extinction in dB for a given visibility:
/// 10 log10((1 + V)/(1 - V)). Signals V = +-1 as +-infinity.
double extinction_ratio_db(double visibility);

/// Thrown when fringe data cannot constrain the fit (e.g. constant counts).
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Least-squares cos^2 fringe fit over (voltage, counts) points. The two
/// linear parameters are solved in closed form for each candidate v_pi;
/// v_pi itself comes from a coarse scan over [1, 10] V plus golden-section
/// refinement. Requires at least five distinct voltages; throws FitError
/// on degenerate (constant) data.
FringeFit fit_fringe(const std::vector<std::pair<double, double>>& points);

/// Convenience overload fitting mean_c1 against voltage.
FringeFit fit_fringe(const ExperimentResult& result);

/// Expected detections/second at the constructive output with the pulse
/// off: heralded_pair_rate * arm power transmission * efficiency, plus the
/// gated dark contribution.
double expected_rate(const SourceModel& source, const DetectorModel& detector,
                     const engine::SwitchConfig& config);

/// Mean counts per window implied by the models for a photon that reaches
/// the detector arm with probability `detected_probability`.
double expected_count(const SourceModel& source, const DetectorModel& detector,
                      double integration_time, double detected_probability);

}  // namespace sagsim::experiment
