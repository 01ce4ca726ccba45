#pragma once

#include "sagsim/netlist.hpp"
#include "sagsim/optics.hpp"
#include "sagsim/switch_config.hpp"

namespace sagsim::engine {

/// Polarization amplitudes of the photon entering the switch.
struct JonesVector {
  optics::Complex h{1.0, 0.0};
  optics::Complex v{0.0, 0.0};

  double squared_norm() const { return std::norm(h) + std::norm(v); }
  JonesVector normalized() const;
};

/// Linear polarization at the given angle from horizontal.
JonesVector linear_polarization(double angle_rad);

/// One rectangular voltage pulse on the modulators. `delay` is measured
/// from the instant the photon reaches the loop coupler; the pulse is on
/// over the half-open window [delay, delay + width).
struct DrivePulse {
  double delay = 0.0;    // seconds
  double width = 32e-9;  // seconds
  double voltage = 0.0;  // volts
};

/// When each counter-propagating component passes the modulators,
/// measured from the coupler.
struct PassTimes {
  double cw = 0.0;
  double ccw = 0.0;
};

/// Modulator phase picked up by each direction, reduced into [0, 2*pi).
struct PassPhases {
  double cw = 0.0;
  double ccw = 0.0;
};

/// Phase a modulator imparts at the given voltage: pi * voltage / v_pi.
double drive_phase(double voltage, double v_pi);

/// Clockwise light reaches the modulators after the short arm; the
/// counter-clockwise component first crosses the delay fiber.
PassTimes pass_times(const SwitchConfig& config);

/// Gates the pulse against both pass times. A direction that crosses the
/// modulators outside the pulse window picks up no phase.
PassPhases applied_phases(const SwitchConfig& config, const DrivePulse& pulse);

/// Loop output over the basis {D1, D2} x {H, V}:
///   (1/2) [ i(e^{i phi} + 1) |D1> + (e^{i phi} - 1) |D2> ]
///       (x) [ h |H> + e^{i Kl} v |V> ],   phi = cw - ccw,
/// scaled by the lumped loss amplitude 10^(-loop_loss_db/20). The routing
/// factor is independent of polarization, which is the whole point of the
/// crossed modulator structure. Requires a normalized input.
optics::ModeState output_state(const SwitchConfig& config, const JonesVector& input,
                               const PassPhases& phases);

struct DetectionProbabilities {
  double p1 = 0.0;
  double p2 = 0.0;
};

/// Without loss: p1 = cos^2(phi/2), p2 = sin^2(phi/2), independent of the
/// input polarization and of mzs_phase_kl; with loss each is scaled by the
/// power factor of its arm. Computed from the output state rather than the
/// closed form so the two stay honest against each other.
DetectionProbabilities detection_probabilities(const SwitchConfig& config,
                                               const JonesVector& input,
                                               const PassPhases& phases,
                                               bool include_loss = false);

struct CalibrationResult {
  bool adjusted_a = false;  // controller on the short arm was retuned
  bool adjusted_b = false;  // controller on the delay arm was retuned
  double fidelity_a = 0.0;  // achieved population fidelity, short arm
  double fidelity_b = 0.0;
  int evaluations = 0;  // objective evaluations spent
};

/// Retunes the polarization controller on each loop arm so that the arm
/// between the coupler and its splitter acts as the identity (short arm)
/// or as an H<->V exchange (delay arm), undoing any static fiber
/// birefringence declared via the fiber rot_* params. Arms that already
/// meet the 1 - 1e-9 fidelity target are left untouched. Deterministic.
/// Throws std::invalid_argument when the netlist lacks the expected loop
/// topology (one bs, two-port chains ending on pbs ports, a pc per arm).
CalibrationResult calibrate_controllers(netlist::Netlist& netlist);

}  // namespace sagsim::engine
