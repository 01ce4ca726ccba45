#pragma once

#include "sagsim/engine.hpp"
#include "sagsim/optics.hpp"

namespace chain_oracle {

/// Brute-force reference for the switch: propagates the input photon
/// through the full component chain — coupler, controllers, the crossed
/// splitter/waveplate/modulator structure (traversed once per direction
/// with that direction's modulator phase), and the recombining coupler —
/// by multiplying the actual component matrices. Shares no formula with
/// engine::output_state beyond the component definitions themselves.
/// Returns the state over {D1, D2} x {H, V} including the lumped loss.
sagsim::optics::ModeState propagate(const sagsim::engine::SwitchConfig& config,
                                    const sagsim::engine::JonesVector& input,
                                    double phi_cw, double phi_ccw);

}  // namespace chain_oracle
