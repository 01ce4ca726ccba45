#pragma once

#include <optional>

namespace sagsim::engine {

/// Physical parameters of the switch. Defaults follow the demonstrated
/// device: 4 V half-wave voltage, 32 ns drive pulses, 100 m delay fiber.
struct SwitchConfig {
  double v_pi = 4.0;               // volts for a pi phase shift
  double pulse_width = 32e-9;      // seconds
  double delay_length = 100.0;     // meters of delay fiber on path B
  double group_index = 1.468;      // standard single-mode fiber near 1550 nm
  double mzs_phase_kl = 0.0;       // relative phase between the MZ-structure arms (rad)
  double loop_loss_db = 5.0;       // lumped loss, switch input to detector
  double short_arm_transit = 10e-9;  // BS -> modulators transit on path A (s)
  bool kl_drift = false;           // redraw mzs_phase_kl per repetition

  // Per-detector-arm overrides; unset means loop_loss_db.
  std::optional<double> loss_d1_db;
  std::optional<double> loss_d2_db;

  double effective_loss_d1() const { return loss_d1_db.value_or(loop_loss_db); }
  double effective_loss_d2() const { return loss_d2_db.value_or(loop_loss_db); }
};

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const SwitchConfig& config);

}  // namespace sagsim::engine
