#pragma once

#include <cstdio>
#include <cstdlib>
#include <iterator>
#include <string>
#include <vector>

#include "sagsim/netlist.hpp"
#include "sagsim/rng.hpp"

namespace netlist_gen {

/// Round a value to what the canonical text format can carry (nine
/// significant digits); generated values must survive a save/load cycle.
inline double quantize(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return std::strtod(buf, nullptr);
}

/// Random valid netlist: unique names, required params always present and in
/// range, connections only between declared, previously unused ports.
inline sagsim::netlist::Netlist random_netlist(sagsim::rng::Stream& s) {
  using namespace sagsim::netlist;
  static const Kind kKinds[] = {Kind::Bs,     Kind::Pbs,    Kind::Hwp,
                                Kind::Pm,     Kind::Pc,     Kind::Att,
                                Kind::Fiber,  Kind::Circulator,
                                Kind::Source, Kind::Detector};
  Netlist n;
  const int count = 2 + static_cast<int>(s.next_u64() % 8);
  for (int i = 0; i < count; ++i) {
    ComponentDecl decl;
    decl.kind = kKinds[s.next_u64() % std::size(kKinds)];
    decl.name = std::string(to_string(decl.kind)) + "_" + std::to_string(i);
    auto put = [&](const char* key, double value) { decl.params[key] = quantize(value); };
    switch (decl.kind) {
      case Kind::Bs: put("ratio", s.next_uniform(0.05, 0.95)); break;
      case Kind::Hwp: put("angle", s.next_uniform(-3.0, 3.0)); break;
      case Kind::Pm:
        put("phase", s.next_uniform(0.0, 6.2));
        put("axis", s.next_bernoulli(0.5) ? 1.0 : 0.0);
        break;
      case Kind::Pc:
        put("a", s.next_uniform(-3.0, 3.0));
        put("b", s.next_uniform(-3.0, 3.0));
        put("c", s.next_uniform(-3.0, 3.0));
        break;
      case Kind::Att: put("loss_db", s.next_uniform(0.0, 30.0)); break;
      case Kind::Fiber:
        put("length_m", s.next_uniform(0.0, 500.0));
        if (s.next_bernoulli(0.5)) put("group_index", s.next_uniform(1.0, 2.0));
        if (s.next_bernoulli(0.3)) put("rot_a", s.next_uniform(-3.0, 3.0));
        break;
      default: break;
    }
    n.decls.push_back(std::move(decl));
  }

  // Pool of free ports, consumed two at a time.
  std::vector<PortRef> free;
  for (const ComponentDecl& decl : n.decls)
    for (const std::string& port : ports_of(decl.kind)) free.push_back({decl.name, port});
  while (free.size() >= 2 && s.next_bernoulli(0.7)) {
    auto take = [&] {
      std::size_t i = s.next_u64() % free.size();
      PortRef ref = free[i];
      free.erase(free.begin() + static_cast<std::ptrdiff_t>(i));
      return ref;
    };
    Connection conn{take(), take()};
    n.connections.push_back(std::move(conn));
  }
  return n;
}

}  // namespace netlist_gen
