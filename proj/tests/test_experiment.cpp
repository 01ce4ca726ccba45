#include "sagsim/experiment.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <doctest.h>

#include "sagsim/components.hpp"

using namespace sagsim;
using namespace sagsim::experiment;
using engine::DrivePulse;
using engine::JonesVector;
using engine::SwitchConfig;
using rng::Stream;

namespace {

constexpr double kPi = std::numbers::pi;

/// Heralded flux actually landing in D1 at phi = 0 with the stock loss:
/// 10^(-5 dB / 10) of the photons survive, 15% of those are detected.
const double kArmTransmission = components::attenuation_power(5.0);

}  // namespace

TEST_CASE("model validation rejects inconsistent parameters") {
  SourceModel source;
  source.heralded_pair_rate = source.trigger_rate + 1.0;
  CHECK_THROWS_AS(validate(source), std::invalid_argument);
  source = SourceModel{};
  source.trigger_rate = 0.0;
  CHECK_THROWS_AS(validate(source), std::invalid_argument);
  CHECK_NOTHROW(validate(SourceModel{}));

  DetectorModel detector;
  detector.efficiency = 1.5;
  CHECK_THROWS_AS(validate(detector), std::invalid_argument);
  detector = DetectorModel{};
  detector.gate_width = 0.0;
  CHECK_THROWS_AS(validate(detector), std::invalid_argument);
  CHECK_NOTHROW(validate(DetectorModel{}));
}

TEST_CASE("default sweep grid runs 0 to 8 volts in half-volt steps") {
  std::vector<double> v = default_voltages();
  REQUIRE(v.size() == 17);
  CHECK(v.front() == 0.0);
  CHECK(v.back() == 8.0);
  CHECK(v[1] == 0.5);
}

TEST_CASE("window simulation is a pure function of the stream key") {
  SourceModel source;
  DetectorModel detector;
  Stream a = Stream::for_trial(1, 0, 0);
  Stream b = Stream::for_trial(1, 0, 0);
  WindowCounts first = simulate_window(0.3, 0.2, source, detector, 10.0, a);
  WindowCounts second = simulate_window(0.3, 0.2, source, detector, 10.0, b);
  CHECK(first == second);

  Stream c = Stream::for_trial(1, 0, 1);
  WindowCounts other = simulate_window(0.3, 0.2, source, detector, 10.0, c);
  CHECK_FALSE(first == other);
}

TEST_CASE("window simulation validates its inputs") {
  SourceModel source;
  DetectorModel detector;
  Stream s(1);
  CHECK_THROWS_AS(simulate_window(-0.1, 0.0, source, detector, 1.0, s),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate_window(0.7, 0.6, source, detector, 1.0, s),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate_window(0.3, 0.2, source, detector, 0.0, s),
                  std::invalid_argument);
}

TEST_CASE("dead detectors count nothing") {
  SourceModel source;
  DetectorModel detector;
  detector.efficiency = 0.0;
  detector.dark_rate = 0.0;
  Stream s(2);
  WindowCounts counts = simulate_window(1.0, 0.0, source, detector, 10.0, s);
  CHECK(counts.heralds > 0);
  CHECK(counts.c1 == 0);
  CHECK(counts.c2 == 0);
}

TEST_CASE("per-herald detection matches the binomial rate") {
  // A million heralds, no darks: c1/heralds estimates
  // pair_probability * p1 * efficiency = 0.15 * 10^(-0.5) = 0.047434165.
  SourceModel source{1e5, 1e5};
  DetectorModel detector{0.15, 0.0, 100e-9};
  Stream s(3);
  WindowCounts counts = simulate_window(kArmTransmission, 0.0, source, detector, 10.0, s);
  const double n = static_cast<double>(counts.heralds);
  REQUIRE(n > 9e5);
  const double q = 0.15 * kArmTransmission;
  CHECK(q == doctest::Approx(0.047434165).epsilon(1e-6));
  const double sigma = std::sqrt(q * (1.0 - q) / n);
  CHECK(std::abs(static_cast<double>(counts.c1) / n - q) < 4.0 * sigma);
  CHECK(counts.c2 == 0);
}

TEST_CASE("dark counts scale with the number of opened gates") {
  // No photons at all: only the gated dark floor remains, which for the
  // stock numbers is dark_rate * gate_width * heralds ~ 3.05 per 10 s window.
  SourceModel source{529.3, 0.0};
  DetectorModel detector;
  double total = 0.0;
  const int windows = 200;
  for (int i = 0; i < windows; ++i) {
    Stream s = Stream::for_trial(4, 0, static_cast<std::uint64_t>(i));
    WindowCounts counts = simulate_window(0.0, 0.0, source, detector, 10.0, s);
    total += static_cast<double>(counts.c1);
  }
  const double mean = total / windows;
  const double expected = 529.3 * 10.0 * detector.dark_rate * detector.gate_width;
  CHECK(expected == doctest::Approx(3.0476).epsilon(1e-3));
  CHECK(std::abs(mean - expected) < 5.0 * std::sqrt(expected / windows));
}

TEST_CASE("expected counts freeze the calibration arithmetic") {
  SourceModel source;
  DetectorModel detector;
  // Signal: 529.3 * 10^(-0.5) * 0.15 = 25.107/s. Darks: 529.3 * 5757.7 * 1e-7
  // = 0.3048/s. Ten seconds of both lands at 254.1 counts.
  CHECK(expected_count(source, detector, 10.0, kArmTransmission) ==
        doctest::Approx(254.117).epsilon(1e-3));
  CHECK(expected_rate(source, detector, SwitchConfig{}) ==
        doctest::Approx(25.4117).epsilon(1e-3));

  // Per-arm override changes the rate through the transmission factor.
  SwitchConfig config;
  config.loss_d1_db = 0.0;
  CHECK(expected_rate(source, detector, config) ==
        doctest::Approx(529.3 * 0.15 + 0.30476).epsilon(1e-3));
}

TEST_CASE("visibility is the normalized count difference") {
  CHECK(visibility(100.0, 0.0) == 1.0);
  CHECK(visibility(0.0, 100.0) == -1.0);
  CHECK(visibility(50.0, 50.0) == 0.0);
  CHECK(visibility(254.117, 3.0476) == doctest::Approx(0.976301).epsilon(1e-4));
  CHECK_THROWS_AS(visibility(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("extinction ratio follows the visibility") {
  CHECK(extinction_ratio_db(0.0) == 0.0);
  CHECK(extinction_ratio_db(0.5) == doctest::Approx(4.7712125));
  CHECK(extinction_ratio_db(0.9763) == doctest::Approx(19.2109).epsilon(1e-4));
  CHECK(std::isinf(extinction_ratio_db(1.0)));
  CHECK(extinction_ratio_db(-1.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("fringe fit recovers a noiseless cosine-squared curve") {
  std::vector<std::pair<double, double>> points;
  for (double v = 0.0; v <= 8.0; v += 0.5) {
    double f = std::cos(kPi * v / 8.0);
    points.emplace_back(v, 254.0 * f * f + 3.0);
  }
  FringeFit fit = fit_fringe(points);
  CHECK(fit.v_pi == doctest::Approx(4.0).epsilon(2.5e-4));
  CHECK(fit.amplitude == doctest::Approx(254.0).epsilon(1e-4));
  CHECK(fit.offset == doctest::Approx(3.0).epsilon(1e-2));
  CHECK(fit.visibility == doctest::Approx(254.0 / 260.0).epsilon(1e-4));
  CHECK(fit.rms_residual < 0.05);
}

TEST_CASE("fringe fit rejects unusable data") {
  std::vector<std::pair<double, double>> constant;
  for (double v = 0.0; v <= 8.0; v += 1.0) constant.emplace_back(v, 42.0);
  CHECK_THROWS_AS(fit_fringe(constant), FitError);

  std::vector<std::pair<double, double>> few = {{0.0, 1.0}, {1.0, 2.0}, {2.0, 3.0},
                                                {3.0, 2.0}};
  CHECK_THROWS_AS(fit_fringe(few), std::invalid_argument);
}

TEST_CASE("a voltage sweep reproduces the fringe end to end") {
  SwitchConfig config;
  SourceModel source;
  DetectorModel detector;
  RunPlan plan;
  plan.repetitions = 5;
  plan.integration_time = 2.0;
  plan.seed = 7;

  ExperimentResult result = run_voltage_sweep(config, source, detector, plan);
  REQUIRE(result.settings.size() == 17);

  // Analytic columns carry the lossless fringe.
  CHECK(result.settings[0].p1_analytic == doctest::Approx(1.0));
  CHECK(result.settings[8].p1_analytic < 1e-12);   // 4 V: everything switched
  CHECK(result.settings[16].p1_analytic == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(result.settings[4].p1_analytic == doctest::Approx(0.5));  // 2 V

  // Counts follow: bright at 0 V, dark at 4 V.
  CHECK(result.settings[0].mean_c1 > 10.0 * result.settings[8].mean_c1);
  CHECK(result.settings[8].mean_c2 > 10.0 * result.settings[8].mean_c1);

  CHECK(result.visibility > 0.9);
  CHECK(result.extinction_db > 10.0);
  CHECK(result.fit.v_pi == doctest::Approx(4.0).epsilon(0.05));
  CHECK(result.fit.visibility > 0.9);
}

TEST_CASE("sweeps with the same seed are identical, different seeds are not") {
  SwitchConfig config;
  SourceModel source;
  DetectorModel detector;
  RunPlan plan;
  plan.repetitions = 3;
  plan.integration_time = 1.0;
  plan.voltages = {0.0, 2.0, 4.0, 6.0, 8.0};

  ExperimentResult a = run_voltage_sweep(config, source, detector, plan);
  ExperimentResult b = run_voltage_sweep(config, source, detector, plan);
  REQUIRE(a.settings.size() == b.settings.size());
  for (std::size_t i = 0; i < a.settings.size(); ++i) {
    CHECK(a.settings[i].windows == b.settings[i].windows);
    CHECK(a.settings[i].mean_c1 == b.settings[i].mean_c1);
  }

  plan.seed = 2;
  ExperimentResult c = run_voltage_sweep(config, source, detector, plan);
  bool any_different = false;
  for (std::size_t i = 0; i < a.settings.size(); ++i) {
    if (!(a.settings[i].windows == c.settings[i].windows)) any_different = true;
  }
  CHECK(any_different);
}

TEST_CASE("sweep skips the fit when the grid is too sparse") {
  SwitchConfig config;
  RunPlan plan;
  plan.repetitions = 2;
  plan.integration_time = 1.0;
  plan.voltages = {0.0, 4.0};
  ExperimentResult result = run_voltage_sweep(config, SourceModel{}, DetectorModel{}, plan);
  CHECK(result.fit.v_pi == 0.0);  // not attempted
  CHECK(result.settings.size() == 2);
}

TEST_CASE("structure-phase drift does not spoil the switch") {
  // The crossed-splitter design makes routing independent of the structure
  // phase, so redrawing it every window must not degrade the visibility.
  SwitchConfig steady;
  SwitchConfig drifting;
  drifting.kl_drift = true;
  RunPlan plan;
  plan.repetitions = 10;
  plan.integration_time = 5.0;
  plan.input_state = engine::linear_polarization(kPi / 4);
  plan.voltages = {0.0, 1.0, 2.0, 3.0, 4.0};

  ExperimentResult a = run_voltage_sweep(steady, SourceModel{}, DetectorModel{}, plan);
  ExperimentResult b = run_voltage_sweep(drifting, SourceModel{}, DetectorModel{}, plan);
  CHECK(a.visibility > 0.93);
  CHECK(b.visibility > 0.93);
}

TEST_CASE("heavier dark floor degrades the visibility") {
  SwitchConfig config;
  RunPlan plan;
  plan.repetitions = 8;
  plan.integration_time = 5.0;
  plan.voltages = {0.0, 4.0};
  DetectorModel quiet;
  DetectorModel noisy;
  noisy.dark_rate = 5e5;

  ExperimentResult a = run_voltage_sweep(config, SourceModel{}, quiet, plan);
  ExperimentResult b = run_voltage_sweep(config, SourceModel{}, noisy, plan);
  CHECK(b.visibility < a.visibility - 0.05);
}

TEST_CASE("delay scan resolves which pass the pulse catches") {
  SwitchConfig config;
  SourceModel source;
  DetectorModel detector;
  RunPlan plan;
  plan.repetitions = 4;
  plan.integration_time = 2.0;

  // Windows: [-23, 9) misses the 10 ns pass; [-6, 26) catches it;
  // [480, 512) catches only the 499.67 ns counter-propagating pass.
  std::vector<double> delays = {-23e-9, -6e-9, 480e-9};
  std::vector<DelayScanPoint> points =
      run_delay_scan(config, source, detector, delays, 4.0, plan);
  REQUIRE(points.size() == 3);

  CHECK(points[0].phi_cw == 0.0);
  CHECK(points[0].phi_ccw == 0.0);
  CHECK(points[1].phi_cw == doctest::Approx(kPi));
  CHECK(points[1].phi_ccw == 0.0);
  CHECK(points[2].phi_cw == 0.0);
  CHECK(points[2].phi_ccw == doctest::Approx(kPi));

  // Both single-pass captures switch the output; the miss does not.
  CHECK(points[0].mean_c1 > 10.0 * points[1].mean_c1);
  CHECK(points[0].mean_c1 > 10.0 * points[2].mean_c1);
  CHECK(points[1].mean_c2 > 10.0 * points[1].mean_c1);
  CHECK(points[0].delay == -23e-9);
}

TEST_CASE("the physics overload reduces to the explicit-probability one") {
  SwitchConfig config;
  SourceModel source;
  DetectorModel detector;
  DrivePulse pulse{config.short_arm_transit - config.pulse_width / 2,
                   config.pulse_width, 0.0};

  Stream a = Stream::for_trial(9, 1, 2);
  WindowCounts via_config =
      simulate_window(config, source, detector, pulse, JonesVector{}, 10.0, a);

  Stream b = Stream::for_trial(9, 1, 2);
  WindowCounts via_probs =
      simulate_window(kArmTransmission, 0.0, source, detector, 10.0, b);
  CHECK(via_config == via_probs);
}
