#include "sagsim/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "sagsim/components.hpp"

namespace sagsim::engine {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double wrap_two_pi(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y = 0.0;
  return y;
}

}  // namespace

void validate(const SwitchConfig& config) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid switch config: ") + what);
  };
  require(config.v_pi > 0.0, "v_pi must be positive");
  require(config.pulse_width > 0.0, "pulse_width must be positive");
  require(config.delay_length >= 0.0, "delay_length must be non-negative");
  require(config.group_index >= 1.0, "group_index must be at least 1");
  require(config.short_arm_transit >= 0.0, "short_arm_transit must be non-negative");
  require(config.loop_loss_db >= 0.0, "loop_loss_db must be non-negative");
  require(!config.loss_d1_db || *config.loss_d1_db >= 0.0,
          "loss_d1_db must be non-negative");
  require(!config.loss_d2_db || *config.loss_d2_db >= 0.0,
          "loss_d2_db must be non-negative");
}

JonesVector JonesVector::normalized() const {
  double n = std::sqrt(squared_norm());
  if (n == 0.0) throw std::invalid_argument("cannot normalize a zero Jones vector");
  return {h / n, v / n};
}

JonesVector linear_polarization(double angle_rad) {
  return {std::cos(angle_rad), std::sin(angle_rad)};
}

double drive_phase(double voltage, double v_pi) {
  if (v_pi <= 0.0) throw std::invalid_argument("v_pi must be positive");
  return kPi * voltage / v_pi;
}

PassTimes pass_times(const SwitchConfig& config) {
  validate(config);
  double loop_delay = components::fiber_delay(config.delay_length, config.group_index);
  return {config.short_arm_transit, config.short_arm_transit + loop_delay};
}

PassPhases applied_phases(const SwitchConfig& config, const DrivePulse& pulse) {
  if (pulse.width <= 0.0) throw std::invalid_argument("pulse width must be positive");
  PassTimes times = pass_times(config);
  double phase = wrap_two_pi(drive_phase(pulse.voltage, config.v_pi));
  auto gated = [&](double t) {
    bool on = t >= pulse.delay && t < pulse.delay + pulse.width;
    return on ? phase : 0.0;
  };
  return {gated(times.cw), gated(times.ccw)};
}

optics::ModeState output_state(const SwitchConfig& config, const JonesVector& input,
                               const PassPhases& phases) {
  validate(config);
  if (std::abs(input.squared_norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("input Jones vector must be normalized");
  }
  using optics::Complex;
  const Complex i(0.0, 1.0);
  double phi = phases.cw - phases.ccw;
  Complex swing = std::exp(i * phi);
  double loss = components::attenuation_amplitude(config.loop_loss_db);
  Complex to_d1 = 0.5 * loss * i * (swing + 1.0);
  Complex to_d2 = 0.5 * loss * (swing - 1.0);
  Complex v_amp = std::exp(i * config.mzs_phase_kl) * input.v;

  optics::ModeBasis basis = optics::ModeBasis::over({"D1", "D2"});
  return optics::ModeState(basis, {to_d1 * input.h, to_d1 * v_amp, to_d2 * input.h,
                                   to_d2 * v_amp});
}

DetectionProbabilities detection_probabilities(const SwitchConfig& config,
                                               const JonesVector& input,
                                               const PassPhases& phases,
                                               bool include_loss) {
  SwitchConfig lossless = config;
  lossless.loop_loss_db = 0.0;
  lossless.loss_d1_db.reset();
  lossless.loss_d2_db.reset();
  optics::ModeState out = output_state(lossless, input, phases);
  DetectionProbabilities probs;
  probs.p1 = optics::probability_spatial(out, "D1");
  probs.p2 = optics::probability_spatial(out, "D2");
  if (include_loss) {
    probs.p1 *= components::attenuation_power(config.effective_loss_d1());
    probs.p2 *= components::attenuation_power(config.effective_loss_d2());
  }
  return probs;
}

// ---------------------------------------------------------------------------
// Controller calibration: walk the two loop arms, model each arm as a 2x2
// Jones product, and tune the arm's controller until the product hits its
// target (identity on the short arm, exchange on the delay arm).

namespace {

using optics::Complex;

struct Mat2 {
  std::array<Complex, 4> m{};  // row-major

  static Mat2 identity() { return {{Complex(1.0), Complex(0.0), Complex(0.0), Complex(1.0)}}; }
};

Mat2 multiply(const Mat2& a, const Mat2& b) {
  Mat2 r;
  r.m[0] = a.m[0] * b.m[0] + a.m[1] * b.m[2];
  r.m[1] = a.m[0] * b.m[1] + a.m[1] * b.m[3];
  r.m[2] = a.m[2] * b.m[0] + a.m[3] * b.m[2];
  r.m[3] = a.m[2] * b.m[1] + a.m[3] * b.m[3];
  return r;
}

Mat2 transpose(const Mat2& a) { return {{a.m[0], a.m[2], a.m[1], a.m[3]}}; }

Mat2 from_op(const optics::ComponentOp& op) {
  return {{op.at(0, 0), op.at(0, 1), op.at(1, 0), op.at(1, 1)}};
}

struct ArmElement {
  const netlist::ComponentDecl* decl = nullptr;
  bool forward = true;  // entered through port "a"
};

struct Arm {
  std::vector<ArmElement> elements;
  std::size_t controller = 0;  // index into elements of the pc being tuned
  double fiber_length = 0.0;
  std::string start_port;  // coupler port this arm hangs off ("p3"/"p4")
};

Mat2 element_matrix(const ArmElement& element) {
  const netlist::ComponentDecl& d = *element.decl;
  optics::ComponentOp op;
  switch (d.kind) {
    case netlist::Kind::Hwp:
      op = components::hwp(d.param_or("angle", 0.0));
      break;
    case netlist::Kind::Pm:
      op = components::phase_modulator(d.param_or("phase", 0.0),
                                       d.param_or("axis", 0.0) == 1.0
                                           ? optics::Polarization::V
                                           : optics::Polarization::H);
      break;
    case netlist::Kind::Pc:
      op = components::polarization_controller(d.param_or("a", 0.0),
                                               d.param_or("b", 0.0),
                                               d.param_or("c", 0.0));
      break;
    case netlist::Kind::Att:
      op = components::attenuator(d.param_or("loss_db", 0.0));
      break;
    case netlist::Kind::Fiber:
      // Static birefringence model: an arbitrary polarization rotation
      // declared on the fiber itself.
      op = components::polarization_controller(d.param_or("rot_a", 0.0),
                                               d.param_or("rot_b", 0.0),
                                               d.param_or("rot_c", 0.0));
      break;
    default:
      throw std::logic_error("element_matrix: not a two-port element");
  }
  Mat2 m = from_op(op);
  return element.forward ? m : transpose(m);
}

/// Jones product of the whole arm with the controller angles overridden.
Mat2 arm_matrix(const Arm& arm, const std::array<double, 3>& pc_angles) {
  Mat2 total = Mat2::identity();
  for (std::size_t i = 0; i < arm.elements.size(); ++i) {
    Mat2 m;
    if (i == arm.controller) {
      m = from_op(components::polarization_controller(pc_angles[0], pc_angles[1],
                                                      pc_angles[2]));
      if (!arm.elements[i].forward) m = transpose(m);
    } else {
      m = element_matrix(arm.elements[i]);
    }
    total = multiply(m, total);
  }
  return total;
}

/// Population fidelity of H-in against the target output polarization.
/// Row 0 targets H (identity arm), row 1 targets V (exchange arm).
double arm_fidelity(const Mat2& j, std::size_t target_row) {
  double on = std::norm(j.m[target_row * 2]);
  double off = std::norm(j.m[(1 - target_row) * 2]);
  double total = on + off;
  if (total == 0.0) return 0.0;
  return on / total;
}

std::array<double, 3> controller_angles(const netlist::ComponentDecl& pc) {
  return {pc.param_or("a", 0.0), pc.param_or("b", 0.0), pc.param_or("c", 0.0)};
}

/// Nelder–Mead descent on 1 - fidelity, started from `start`. Deterministic.
std::array<double, 3> refine(const Arm& arm, std::size_t target_row,
                             std::array<double, 3> start, int& evaluations) {
  auto objective = [&](const std::array<double, 3>& angles) {
    ++evaluations;
    return 1.0 - arm_fidelity(arm_matrix(arm, angles), target_row);
  };

  constexpr int kDim = 3;
  std::array<std::array<double, 3>, kDim + 1> points;
  std::array<double, kDim + 1> values;
  points[0] = start;
  for (int i = 0; i < kDim; ++i) {
    points[i + 1] = start;
    points[i + 1][i] += 0.35;
  }
  for (int i = 0; i <= kDim; ++i) values[i] = objective(points[i]);

  for (int iter = 0; iter < 400; ++iter) {
    std::array<int, kDim + 1> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return values[a] < values[b]; });
    int best = order[0], second_worst = order[kDim - 1], worst = order[kDim];
    if (values[best] < 1e-13 || values[worst] - values[best] < 1e-15) break;

    std::array<double, 3> centroid{};
    for (int i = 0; i <= kDim; ++i) {
      if (i == worst) continue;
      for (int d = 0; d < kDim; ++d) centroid[d] += points[i][d] / kDim;
    }
    auto blend = [&](double t) {
      std::array<double, 3> p;
      for (int d = 0; d < kDim; ++d) {
        p[d] = centroid[d] + t * (centroid[d] - points[worst][d]);
      }
      return p;
    };

    std::array<double, 3> reflected = blend(1.0);
    double fr = objective(reflected);
    if (fr < values[best]) {
      std::array<double, 3> expanded = blend(2.0);
      double fe = objective(expanded);
      if (fe < fr) {
        points[worst] = expanded;
        values[worst] = fe;
      } else {
        points[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[second_worst]) {
      points[worst] = reflected;
      values[worst] = fr;
    } else {
      std::array<double, 3> contracted = blend(-0.5);
      double fc = objective(contracted);
      if (fc < values[worst]) {
        points[worst] = contracted;
        values[worst] = fc;
      } else {
        for (int i = 0; i <= kDim; ++i) {
          if (i == best) continue;
          for (int d = 0; d < kDim; ++d) {
            points[i][d] = 0.5 * (points[i][d] + points[best][d]);
          }
          values[i] = objective(points[i]);
        }
      }
    }
  }

  int best = 0;
  for (int i = 1; i <= kDim; ++i) {
    if (values[i] < values[best]) best = i;
  }
  return points[best];
}

std::array<double, 3> tune(const Arm& arm, std::size_t target_row, int& evaluations) {
  // Coarse pass over the torus, then local refinement from the best cells.
  std::vector<std::pair<double, std::array<double, 3>>> cells;
  for (int ia = 0; ia < 8; ++ia) {
    for (int ib = 0; ib < 8; ++ib) {
      for (int ic = 0; ic < 8; ++ic) {
        std::array<double, 3> angles = {ia * kPi / 4.0, ib * kPi / 4.0, ic * kPi / 4.0};
        ++evaluations;
        double miss = 1.0 - arm_fidelity(arm_matrix(arm, angles), target_row);
        cells.emplace_back(miss, angles);
      }
    }
  }
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::array<double, 3> best_angles = cells[0].second;
  double best_miss = cells[0].first;
  for (std::size_t attempt = 0; attempt < 3 && attempt < cells.size(); ++attempt) {
    std::array<double, 3> candidate =
        refine(arm, target_row, cells[attempt].second, evaluations);
    double miss = 1.0 - arm_fidelity(arm_matrix(arm, candidate), target_row);
    if (miss < best_miss) {
      best_miss = miss;
      best_angles = candidate;
    }
    if (best_miss <= 1e-9) break;
  }
  for (double& angle : best_angles) angle = wrap_two_pi(angle);
  return best_angles;
}

bool is_two_port(netlist::Kind kind) {
  switch (kind) {
    case netlist::Kind::Hwp:
    case netlist::Kind::Pm:
    case netlist::Kind::Pc:
    case netlist::Kind::Att:
    case netlist::Kind::Fiber:
      return true;
    default:
      return false;
  }
}

}  // namespace

CalibrationResult calibrate_controllers(netlist::Netlist& netlist) {
  std::vector<netlist::Diagnostic> issues = netlist::validate(netlist);
  for (const auto& issue : issues) {
    if (issue.severity == netlist::Severity::Error) {
      throw std::invalid_argument("calibrate_controllers: invalid netlist: " +
                                  issue.message);
    }
  }

  const netlist::ComponentDecl* coupler = nullptr;
  for (const auto& decl : netlist.decls) {
    if (decl.kind == netlist::Kind::Bs) {
      if (coupler) {
        throw std::invalid_argument("calibrate_controllers: more than one bs");
      }
      coupler = &decl;
    }
  }
  if (!coupler) throw std::invalid_argument("calibrate_controllers: no bs in netlist");

  std::map<std::pair<std::string, std::string>, netlist::PortRef> peer;
  for (const auto& conn : netlist.connections) {
    peer[{conn.from.component, conn.from.port}] = conn.to;
    peer[{conn.to.component, conn.to.port}] = conn.from;
  }

  auto walk = [&](const std::string& start_port) {
    Arm arm;
    arm.start_port = start_port;
    auto next = peer.find({coupler->name, start_port});
    if (next == peer.end()) {
      throw std::invalid_argument("calibrate_controllers: " + coupler->name + "." +
                                  start_port + " is not connected");
    }
    netlist::PortRef at = next->second;
    bool found_pc = false;
    std::size_t steps = 0;
    while (true) {
      if (++steps > netlist.decls.size() + 1) {
        throw std::invalid_argument("calibrate_controllers: loop arm from " +
                                    coupler->name + "." + start_port +
                                    " does not terminate on a pbs");
      }
      const netlist::ComponentDecl* decl = netlist.find(at.component);
      if (decl->kind == netlist::Kind::Pbs) break;
      if (!is_two_port(decl->kind)) {
        throw std::invalid_argument("calibrate_controllers: unexpected " +
                                    std::string(to_string(decl->kind)) + " '" +
                                    decl->name + "' inside a loop arm");
      }
      bool forward = at.port == "a";
      if (decl->kind == netlist::Kind::Pc && !found_pc) {
        arm.controller = arm.elements.size();
        found_pc = true;
      }
      if (decl->kind == netlist::Kind::Fiber) {
        arm.fiber_length += decl->param_or("length_m", 0.0);
      }
      arm.elements.push_back({decl, forward});
      std::string exit_port = forward ? "b" : "a";
      auto onward = peer.find({decl->name, exit_port});
      if (onward == peer.end()) {
        throw std::invalid_argument("calibrate_controllers: " + decl->name + "." +
                                    exit_port + " is not connected");
      }
      at = onward->second;
    }
    if (!found_pc) {
      throw std::invalid_argument(
          "calibrate_controllers: loop arm from " + coupler->name + "." + start_port +
          " has no polarization controller");
    }
    return arm;
  };

  Arm first = walk("p3");
  Arm second = walk("p4");
  // The arm carrying the delay fiber needs the exchange; the other the
  // identity. Tie-break on the coupler port for fiberless toy netlists.
  bool second_is_delay = second.fiber_length >= first.fiber_length;
  Arm& identity_arm = second_is_delay ? first : second;
  Arm& exchange_arm = second_is_delay ? second : first;

  CalibrationResult result;
  auto tune_arm = [&](Arm& arm, std::size_t target_row, bool& adjusted,
                      double& fidelity) {
    std::array<double, 3> current =
        controller_angles(*arm.elements[arm.controller].decl);
    fidelity = arm_fidelity(arm_matrix(arm, current), target_row);
    ++result.evaluations;
    if (fidelity >= 1.0 - 1e-9) return;  // leave a calibrated arm alone

    std::array<double, 3> tuned = tune(arm, target_row, result.evaluations);
    fidelity = arm_fidelity(arm_matrix(arm, tuned), target_row);
    if (fidelity < 1.0 - 1e-9) {
      throw std::runtime_error(
          "calibrate_controllers: search did not converge on the arm from " +
          coupler->name + "." + arm.start_port +
          "; best fidelity = " + std::to_string(fidelity));
    }
    // Write the angles back into the declaration being tuned.
    const std::string& name = arm.elements[arm.controller].decl->name;
    for (auto& decl : netlist.decls) {
      if (decl.name == name) {
        decl.params["a"] = tuned[0];
        decl.params["b"] = tuned[1];
        decl.params["c"] = tuned[2];
      }
    }
    adjusted = true;
  };

  tune_arm(identity_arm, 0, result.adjusted_a, result.fidelity_a);
  tune_arm(exchange_arm, 1, result.adjusted_b, result.fidelity_b);
  return result;
}

}  // namespace sagsim::engine
