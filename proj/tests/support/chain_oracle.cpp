#include "chain_oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sagsim/components.hpp"

namespace chain_oracle {
namespace {

using sagsim::optics::Complex;
using sagsim::optics::ComponentOp;
using sagsim::optics::ModeBasis;
using sagsim::optics::ModeState;
using sagsim::optics::Polarization;
namespace components = sagsim::components;
namespace optics = sagsim::optics;

constexpr double kPi = std::numbers::pi;

/// Crossed fibers between the two splitters: path A continues as B and
/// vice versa, polarization untouched.
ComponentOp path_swap(const ModeBasis& two) {
  ComponentOp op(two, two, std::vector<Complex>(16, Complex{0.0, 0.0}));
  for (std::size_t i = 0; i < 4; ++i) op.at((i + 2) % 4, i) = 1.0;
  op.unitary = true;
  return op;
}

/// A <- A corner of a two-path operator as a standalone 2x2. The crossed
/// structure must route everything back out of the port it came in on;
/// amplitude reaching the stray port means the model is wired wrong.
ComponentOp block_aa(const ComponentOp& op) {
  double leak = 0.0;
  for (std::size_t row = 2; row < 4; ++row)
    for (std::size_t col = 0; col < 2; ++col) leak += std::abs(op.at(row, col));
  if (leak > 1e-9)
    throw std::logic_error("chain oracle: inner structure leaks into the stray port");
  ModeBasis one = ModeBasis::over({"A"});
  return ComponentOp(one, one,
                     {op.at(0, 0), op.at(0, 1), op.at(1, 0), op.at(1, 1)});
}

}  // namespace

ModeState propagate(const sagsim::engine::SwitchConfig& config,
                    const sagsim::engine::JonesVector& input,
                    double phi_cw, double phi_ccw) {
  const ModeBasis one = ModeBasis::over({"A"});
  const ModeBasis two = ModeBasis::over({"A", "B"});

  // Controllers at their nominal settings: identity before the near splitter,
  // H<->V exchange on the delay side so the single net waveplate pass of the
  // crossed structure is undone for either direction.
  const ComponentOp pc_a = components::polarization_controller(0.0, 0.0, 0.0, "A");
  const ComponentOp pc_b = components::polarization_controller(0.0, kPi / 4, 0.0, "A");

  // Inner splitter/waveplate/modulator structure for one traversal.  The
  // modulators are driven, so each direction gets its own phase; the static
  // arm-length phase rides on the waveplate arm.
  auto inner = [&](double phi) {
    ComponentOp arm1 = optics::compose(
        components::phase_modulator(phi, Polarization::V, "A"),
        components::hwp(kPi / 4, "A"));
    ComponentOp arm2 = optics::compose(
        components::path_phase(config.mzs_phase_kl, "B"),
        optics::compose(components::hwp(kPi / 4, "B"),
                        components::phase_modulator(phi, Polarization::V, "B")));
    ComponentOp arms =
        optics::compose(optics::embed(arm2, two), optics::embed(arm1, two));
    ComponentOp splitter = components::pbs("A", "B");
    return optics::compose(
        optics::transposed(splitter),
        optics::compose(path_swap(two), optics::compose(arms, splitter)));
  };

  // Loop transfer matrix seen from the coupler, one per direction.  The
  // counter-clockwise wave meets every element in reverse, which for
  // reciprocal elements is the plain transpose.
  const ComponentOp cw = optics::compose(
      optics::transposed(pc_b),
      optics::compose(block_aa(inner(phi_cw)), pc_a));
  const ComponentOp ccw = optics::compose(
      optics::transposed(pc_a),
      optics::compose(block_aa(optics::transposed(inner(phi_ccw))), pc_b));

  // Sagnac pass: split at the coupler, send one share around each way,
  // recombine on the way back (loop-side ports swap roles on the return).
  const ComponentOp coupler = components::beamsplitter(0.5, "A", "B");
  ModeState split = optics::apply(coupler, ModeState(two, {input.h, input.v, 0.0, 0.0}));

  ModeState cw_out = optics::apply(cw, ModeState(one, {split.amplitudes[0], split.amplitudes[1]}));
  ModeState ccw_out = optics::apply(ccw, ModeState(one, {split.amplitudes[2], split.amplitudes[3]}));

  ModeState returning(two, {ccw_out.amplitudes[0], ccw_out.amplitudes[1],
                            cw_out.amplitudes[0], cw_out.amplitudes[1]});
  ModeState out = optics::apply(optics::transposed(coupler), returning);

  const double amp = components::attenuation_amplitude(config.loop_loss_db);
  return ModeState(ModeBasis::over({"D1", "D2"}),
                   {amp * out.amplitudes[0], amp * out.amplitudes[1],
                    amp * out.amplitudes[2], amp * out.amplitudes[3]});
}

}  // namespace chain_oracle
