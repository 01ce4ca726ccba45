#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sagsim/switch_config.hpp"

namespace sagsim::netlist {

/// Component kinds understood by the `.sagnet` format.
enum class Kind { Bs, Pbs, Hwp, Pm, Pc, Att, Fiber, Circulator, Source, Detector };

/// Lowercase keyword for a kind, as it appears in netlist files.
const char* to_string(Kind kind);

/// Inverse of to_string(); empty when the keyword is unknown.
std::optional<Kind> kind_from_string(std::string_view word);

/// Port names a component of the given kind exposes, in declaration order.
const std::vector<std::string>& ports_of(Kind kind);

/// One `kind name key=value ...` line. Params are kept sparse: keys the
/// file did not mention are absent and readers fall back to defaults.
struct ComponentDecl {
  std::string name;
  Kind kind = Kind::Bs;
  std::map<std::string, double> params;

  bool operator==(const ComponentDecl&) const = default;

  double param_or(const std::string& key, double fallback) const;
};

/// One endpoint of a connection, `component.port`.
struct PortRef {
  std::string component;
  std::string port;

  bool operator==(const PortRef&) const = default;
};

/// A directed fiber from one port to another.
struct Connection {
  PortRef from;
  PortRef to;

  bool operator==(const Connection&) const = default;
};

/// Parsed circuit description. Equality is structural: declaration and
/// connection order do not matter, names and parameter values do.
struct Netlist {
  std::vector<ComponentDecl> decls;
  std::vector<Connection> connections;

  const ComponentDecl* find(std::string_view name) const;

  bool operator==(const Netlist& other) const;
};

enum class Severity { Error, Warning };

/// A located parse or validation message.
struct Diagnostic {
  int line = 0;  // 1-based; 0 for file-level messages
  int column = 0;
  Severity severity = Severity::Error;
  std::string message;
};

/// Renders "file:line:col: severity: message".
std::string format_diagnostic(std::string_view filename, const Diagnostic& diag);

struct ParseResult {
  std::optional<Netlist> netlist;  // set only when there are no errors
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return netlist.has_value(); }
};

/// Parses netlist text. Recovers per line, so a single pass reports every
/// malformed line rather than stopping at the first.
ParseResult parse(std::string_view text);

/// Semantic checks for an in-memory netlist: duplicate names, unknown or
/// out-of-range params, missing required params, connections that mention
/// undeclared components or ports, ports used by more than one connection.
/// parse() already runs these; call directly for programmatic netlists.
std::vector<Diagnostic> validate(const Netlist& netlist);

/// Canonical text form: header comment, declarations sorted by component
/// name, then connections sorted lexicographically. Numbers are printed
/// with up to nine significant digits, so serialize() is idempotent:
/// serialize(parse(serialize(n))) == serialize(n).
std::string serialize(const Netlist& netlist);

/// The full switch topology: source, preparation waveplate, circulator,
/// Sagnac loop coupler, polarization controllers on both arms, the crossed
/// polarizing-splitter structure holding the two phase modulators, the
/// delay fiber, output attenuators and three detectors.
Netlist sagnac_preset(const engine::SwitchConfig& config);

}  // namespace sagsim::netlist
