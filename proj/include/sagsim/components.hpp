#pragma once

#include <string>

#include "sagsim/optics.hpp"

namespace sagsim::components {

using optics::ComponentOp;
using optics::Polarization;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// 2x2 Jones operator on one spatial label (same basis in and out).
/// 4x4 dual-path operators use ModeBasis::over({label_a, label_b}).

/// Non-polarizing beamsplitter on paths {a, b}: transmission keeps the path
/// label with amplitude sqrt(ratio), reflection crosses it with amplitude
/// i*sqrt(1-ratio). Polarization-diagonal, unitary.
/// Throws std::invalid_argument unless ratio is inside (0, 1).
ComponentOp beamsplitter(double ratio, const std::string& label_a = "A",
                         const std::string& label_b = "B");

/// Polarizing beamsplitter on paths {a, b}: H keeps its path (transmits),
/// V crosses to the other path (reflects). Unitary.
ComponentOp pbs(const std::string& label_a = "A", const std::string& label_b = "B");

/// Half-wave plate at fast-axis angle (radians): standard Jones matrix
/// [[cos 2t, sin 2t], [sin 2t, -cos 2t]]. hwp(pi/4) maps H to V.
ComponentOp hwp(double angle, const std::string& label = "A");

/// Quarter-wave plate at fast-axis angle. Building block of the
/// polarization controller; qwp(0) = diag(1, i).
ComponentOp qwp(double angle, const std::string& label = "A");

/// Phase modulator: e^{i phase} on the axis polarization, identity on the
/// orthogonal one.
ComponentOp phase_modulator(double phase, Polarization axis,
                            const std::string& label = "A");

/// Phase common to both polarizations of one path (propagation phase).
ComponentOp path_phase(double phase, const std::string& label = "A");

/// Manual fiber polarization controller: quarter-half-quarter waveplate
/// triple. Light traverses qwp(c) first, then hwp(b), then qwp(a);
/// (0, 0, 0) is exactly the identity. Any polarization unitary is reachable
/// up to global phase.
ComponentOp polarization_controller(double a, double b, double c,
                                    const std::string& label = "A");

/// Flat attenuation: all amplitudes scaled by 10^(-loss_db/20).
/// Throws std::invalid_argument on negative loss.
ComponentOp attenuator(double loss_db, const std::string& label = "A");

/// Propagation delay of a fiber, seconds: length * group_index / c.
/// No amplitude change; loss is lumped elsewhere.
/// Throws std::invalid_argument if length < 0 or group_index < 1.
double fiber_delay(double length_m, double group_index);

/// Circulator routing 1->2, 2->3. Pure routing, no polarization action.
/// Throws std::invalid_argument for port 3 (no onward port) or unknown ports.
int circulator_route(int in_port);

/// Amplitude scale factor 10^(-loss_db/20).
double attenuation_amplitude(double loss_db);
/// Probability scale factor 10^(-loss_db/10).
double attenuation_power(double loss_db);

}  // namespace sagsim::components
