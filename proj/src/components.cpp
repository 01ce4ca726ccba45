#include "sagsim/components.hpp"

#include <cmath>
#include <stdexcept>

namespace sagsim::components {

using optics::Complex;
using optics::ModeBasis;

namespace {

ComponentOp jones_op(const std::string& label, Complex hh, Complex hv, Complex vh,
                     Complex vv, bool unitary) {
  ModeBasis b = ModeBasis::over({label});
  ComponentOp op(b, b, {hh, hv, vh, vv});
  op.unitary = unitary;
  op.passive_lossy = true;
  return op;
}

}  // namespace

ComponentOp beamsplitter(double ratio, const std::string& label_a,
                         const std::string& label_b) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("beamsplitter: splitting ratio must lie in (0,1), got " +
                                std::to_string(ratio));
  const double t = std::sqrt(ratio);
  const Complex r{0.0, std::sqrt(1.0 - ratio)};
  ModeBasis b = ModeBasis::over({label_a, label_b});
  // Rows/cols ordered (a.H, a.V, b.H, b.V); polarization-diagonal.
  ComponentOp op(b, b,
                 {t, 0, r, 0,
                  0, t, 0, r,
                  r, 0, t, 0,
                  0, r, 0, t});
  op.unitary = true;
  op.passive_lossy = true;
  return op;
}

ComponentOp pbs(const std::string& label_a, const std::string& label_b) {
  ModeBasis b = ModeBasis::over({label_a, label_b});
  ComponentOp op(b, b,
                 {1, 0, 0, 0,
                  0, 0, 0, 1,
                  0, 0, 1, 0,
                  0, 1, 0, 0});
  op.unitary = true;
  op.passive_lossy = true;
  return op;
}

ComponentOp hwp(double angle, const std::string& label) {
  const double c = std::cos(2.0 * angle);
  const double s = std::sin(2.0 * angle);
  return jones_op(label, c, s, s, -c, true);
}

ComponentOp qwp(double angle, const std::string& label) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Complex one_minus_i{1.0, -1.0};
  return jones_op(label, Complex{c * c, s * s}, one_minus_i * s * c,
                  one_minus_i * s * c, Complex{s * s, c * c}, true);
}

ComponentOp phase_modulator(double phase, Polarization axis, const std::string& label) {
  const Complex e = std::polar(1.0, phase);
  if (axis == Polarization::H) return jones_op(label, e, 0, 0, 1, true);
  return jones_op(label, 1, 0, 0, e, true);
}

ComponentOp path_phase(double phase, const std::string& label) {
  const Complex e = std::polar(1.0, phase);
  return jones_op(label, e, 0, 0, e, true);
}

ComponentOp polarization_controller(double a, double b, double c,
                                    const std::string& label) {
  return optics::compose(qwp(a, label),
                         optics::compose(hwp(b, label), qwp(c, label)));
}

ComponentOp attenuator(double loss_db, const std::string& label) {
  if (loss_db < 0.0)
    throw std::invalid_argument("attenuator: loss must be >= 0 dB, got " +
                                std::to_string(loss_db));
  const double amp = attenuation_amplitude(loss_db);
  ComponentOp op = jones_op(label, amp, 0, 0, amp, loss_db == 0.0);
  op.passive_lossy = true;
  return op;
}

double fiber_delay(double length_m, double group_index) {
  if (length_m < 0.0)
    throw std::invalid_argument("fiber_delay: length must be >= 0 m, got " +
                                std::to_string(length_m));
  if (group_index < 1.0)
    throw std::invalid_argument("fiber_delay: group index must be >= 1, got " +
                                std::to_string(group_index));
  return length_m * group_index / kSpeedOfLight;
}

int circulator_route(int in_port) {
  switch (in_port) {
    case 1: return 2;
    case 2: return 3;
    case 3:
      throw std::invalid_argument("circulator_route: port 3 has no onward port");
    default:
      throw std::invalid_argument("circulator_route: unknown port " +
                                  std::to_string(in_port));
  }
}

double attenuation_amplitude(double loss_db) { return std::pow(10.0, -loss_db / 20.0); }

double attenuation_power(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

}  // namespace sagsim::components
