#include "sagsim/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace sagsim::netlist {

namespace {

struct KindInfo {
  Kind kind;
  const char* keyword;
  std::vector<std::string> ports;
  std::vector<std::string> required_params;
  std::vector<std::string> optional_params;
};

const std::vector<KindInfo>& kind_table() {
  static const std::vector<KindInfo> table = {
      {Kind::Bs, "bs", {"p1", "p2", "p3", "p4"}, {"ratio"}, {}},
      {Kind::Pbs, "pbs", {"p1", "p2", "p3", "p4"}, {}, {}},
      {Kind::Hwp, "hwp", {"a", "b"}, {"angle"}, {}},
      {Kind::Pm, "pm", {"a", "b"}, {"phase", "axis"}, {}},
      {Kind::Pc, "pc", {"a", "b"}, {"a", "b", "c"}, {}},
      {Kind::Att, "att", {"a", "b"}, {"loss_db"}, {}},
      {Kind::Fiber, "fiber", {"a", "b"}, {"length_m"},
       {"group_index", "rot_a", "rot_b", "rot_c"}},
      {Kind::Circulator, "circulator", {"p1", "p2", "p3"}, {}, {}},
      {Kind::Source, "source", {"out", "herald"}, {}, {}},
      {Kind::Detector, "detector", {"in"}, {}, {}},
  };
  return table;
}

const KindInfo& info_of(Kind kind) {
  for (const KindInfo& info : kind_table()) {
    if (info.kind == kind) return info;
  }
  std::abort();  // unreachable: every enumerator is in the table
}

bool is_identifier(std::string_view word) {
  if (word.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(word[0])) && word[0] != '_') return false;
  for (char c : word) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

std::string format_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

struct Token {
  std::string text;
  int column = 0;  // 1-based
};

/// Splits one line into whitespace-separated tokens, dropping `#` comments.
std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
           line[i] != '#') {
      ++i;
    }
    tokens.push_back({std::string(line.substr(start, i - start)),
                      static_cast<int>(start) + 1});
  }
  return tokens;
}

bool parse_number(std::string_view text, double& out) {
  std::string owned(text);
  const char* begin = owned.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (end != begin + owned.size() || owned.empty()) return false;
  if (!std::isfinite(value)) return false;
  out = value;
  return true;
}

void add_error(std::vector<Diagnostic>& out, int line, int column, std::string message) {
  out.push_back({line, column, Severity::Error, std::move(message)});
}

/// Where each decl/connection came from, so validate() can point at the
/// offending line. Programmatic netlists get line 0 (file-level).
struct SourceMap {
  std::vector<std::pair<int, int>> decl_pos;  // parallel to netlist.decls
  std::vector<std::pair<int, int>> conn_pos;  // parallel to netlist.connections

  std::pair<int, int> decl(std::size_t i) const {
    return i < decl_pos.size() ? decl_pos[i] : std::make_pair(0, 0);
  }
  std::pair<int, int> conn(std::size_t i) const {
    return i < conn_pos.size() ? conn_pos[i] : std::make_pair(0, 0);
  }
};

void check_param_range(const ComponentDecl& decl, const std::string& key, double value,
                       int line, int column, std::vector<Diagnostic>& out) {
  auto fail = [&](const std::string& why) {
    add_error(out, line, column,
              "param '" + key + "' of " + std::string(to_string(decl.kind)) + " '" +
                  decl.name + "' " + why + " (got " + format_number(value) + ")");
  };
  if (decl.kind == Kind::Bs && key == "ratio") {
    if (!(value > 0.0 && value < 1.0)) fail("must lie strictly between 0 and 1");
  } else if (decl.kind == Kind::Pm && key == "axis") {
    if (value != 0.0 && value != 1.0) fail("must be 0 (H) or 1 (V)");
  } else if (decl.kind == Kind::Att && key == "loss_db") {
    if (!(value >= 0.0)) fail("must be non-negative");
  } else if (decl.kind == Kind::Fiber && key == "length_m") {
    if (!(value >= 0.0)) fail("must be non-negative");
  } else if (decl.kind == Kind::Fiber && key == "group_index") {
    if (!(value >= 1.0)) fail("must be at least 1");
  }
}

std::vector<Diagnostic> validate_impl(const Netlist& netlist, const SourceMap& where) {
  std::vector<Diagnostic> out;

  std::map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < netlist.decls.size(); ++i) {
    const ComponentDecl& decl = netlist.decls[i];
    auto [line, column] = where.decl(i);
    if (!is_identifier(decl.name)) {
      add_error(out, line, column, "invalid component name '" + decl.name + "'");
      continue;
    }
    auto [it, inserted] = by_name.emplace(decl.name, i);
    if (!inserted) {
      add_error(out, line, column, "duplicate component name '" + decl.name + "'");
      continue;
    }
    const KindInfo& info = info_of(decl.kind);
    for (const auto& [key, value] : decl.params) {
      bool known = std::count(info.required_params.begin(), info.required_params.end(),
                              key) != 0 ||
                   std::count(info.optional_params.begin(), info.optional_params.end(),
                              key) != 0;
      if (!known) {
        add_error(out, line, column,
                  "unknown param '" + key + "' for " + info.keyword + " '" + decl.name +
                      "'");
        continue;
      }
      check_param_range(decl, key, value, line, column, out);
    }
    for (const std::string& key : info.required_params) {
      if (!decl.params.count(key)) {
        add_error(out, line, column,
                  "missing required param '" + key + "' for " + info.keyword + " '" +
                      decl.name + "'");
      }
    }
  }

  // Each port may anchor at most one fiber; we track both endpoints.
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> used_ports;
  for (std::size_t i = 0; i < netlist.connections.size(); ++i) {
    const Connection& conn = netlist.connections[i];
    auto [line, column] = where.conn(i);
    for (const PortRef& ref : {conn.from, conn.to}) {
      auto named = by_name.find(ref.component);
      if (named == by_name.end()) {
        add_error(out, line, column,
                  "connection references undeclared component '" + ref.component + "'");
        continue;
      }
      const KindInfo& info = info_of(netlist.decls[named->second].kind);
      if (std::count(info.ports.begin(), info.ports.end(), ref.port) == 0) {
        add_error(out, line, column,
                  std::string(info.keyword) + " '" + ref.component + "' has no port '" +
                      ref.port + "'");
        continue;
      }
      auto key = std::make_pair(ref.component, ref.port);
      auto [it, inserted] = used_ports.emplace(key, std::make_pair(line, column));
      if (!inserted) {
        std::ostringstream msg;
        msg << "port " << ref.component << "." << ref.port
            << " is already connected (line " << it->second.first << ")";
        add_error(out, line, column, msg.str());
      }
    }
  }
  return out;
}

std::string render_connection(const Connection& conn) {
  return "connect " + conn.from.component + "." + conn.from.port + " -> " +
         conn.to.component + "." + conn.to.port;
}

std::tuple<std::string, Kind, std::map<std::string, double>> decl_key(
    const ComponentDecl& d) {
  return {d.name, d.kind, d.params};
}

std::tuple<std::string, std::string, std::string, std::string> conn_key(
    const Connection& c) {
  return {c.from.component, c.from.port, c.to.component, c.to.port};
}

}  // namespace

const char* to_string(Kind kind) { return info_of(kind).keyword; }

std::optional<Kind> kind_from_string(std::string_view word) {
  for (const KindInfo& info : kind_table()) {
    if (word == info.keyword) return info.kind;
  }
  return std::nullopt;
}

const std::vector<std::string>& ports_of(Kind kind) { return info_of(kind).ports; }

double ComponentDecl::param_or(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

const ComponentDecl* Netlist::find(std::string_view name) const {
  for (const ComponentDecl& decl : decls) {
    if (decl.name == name) return &decl;
  }
  return nullptr;
}

bool Netlist::operator==(const Netlist& other) const {
  if (decls.size() != other.decls.size() ||
      connections.size() != other.connections.size()) {
    return false;
  }
  auto sorted_decls = [](const Netlist& n) {
    std::vector<ComponentDecl> v = n.decls;
    std::sort(v.begin(), v.end(), [](const ComponentDecl& a, const ComponentDecl& b) {
      return decl_key(a) < decl_key(b);
    });
    return v;
  };
  auto sorted_conns = [](const Netlist& n) {
    std::vector<Connection> v = n.connections;
    std::sort(v.begin(), v.end(), [](const Connection& a, const Connection& b) {
      return conn_key(a) < conn_key(b);
    });
    return v;
  };
  return sorted_decls(*this) == sorted_decls(other) &&
         sorted_conns(*this) == sorted_conns(other);
}

std::string format_diagnostic(std::string_view filename, const Diagnostic& diag) {
  std::ostringstream out;
  out << filename << ":" << diag.line << ":" << diag.column << ": "
      << (diag.severity == Severity::Error ? "error" : "warning") << ": "
      << diag.message;
  return out.str();
}

ParseResult parse(std::string_view text) {
  Netlist netlist;
  SourceMap where;
  std::vector<Diagnostic> diagnostics;

  auto split_port_ref = [](const Token& token, PortRef& out) {
    std::size_t dot = token.text.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == token.text.size()) {
      return false;
    }
    out.component = token.text.substr(0, dot);
    out.port = token.text.substr(dot + 1);
    return is_identifier(out.component) && is_identifier(out.port);
  };

  int line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    ++line_number;
    if (eol == std::string_view::npos) {
      pos = text.size() + 1;
    } else {
      pos = eol + 1;
    }

    std::vector<Token> tokens = tokenize(line);
    if (tokens.empty()) continue;

    if (tokens[0].text == "connect") {
      if (tokens.size() != 4 || tokens[2].text != "->") {
        add_error(diagnostics, line_number, tokens[0].column,
                  "expected 'connect <name>.<port> -> <name>.<port>'");
        continue;
      }
      Connection conn;
      if (!split_port_ref(tokens[1], conn.from)) {
        add_error(diagnostics, line_number, tokens[1].column,
                  "malformed port reference '" + tokens[1].text +
                      "' (expected <name>.<port>)");
        continue;
      }
      if (!split_port_ref(tokens[3], conn.to)) {
        add_error(diagnostics, line_number, tokens[3].column,
                  "malformed port reference '" + tokens[3].text +
                      "' (expected <name>.<port>)");
        continue;
      }
      netlist.connections.push_back(std::move(conn));
      where.conn_pos.emplace_back(line_number, tokens[0].column);
      continue;
    }

    std::optional<Kind> kind = kind_from_string(tokens[0].text);
    if (!kind) {
      add_error(diagnostics, line_number, tokens[0].column,
                "unknown component kind '" + tokens[0].text + "'");
      continue;
    }
    if (tokens.size() < 2 || !is_identifier(tokens[1].text)) {
      add_error(diagnostics, line_number,
                tokens.size() < 2 ? tokens[0].column : tokens[1].column,
                "expected a component name after '" + tokens[0].text + "'");
      continue;
    }

    ComponentDecl decl;
    decl.kind = *kind;
    decl.name = tokens[1].text;
    bool line_ok = true;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      const Token& token = tokens[i];
      std::size_t eq = token.text.find('=');
      if (eq == std::string::npos || eq == 0) {
        add_error(diagnostics, line_number, token.column,
                  "expected key=value, got '" + token.text + "'");
        line_ok = false;
        continue;
      }
      std::string key = token.text.substr(0, eq);
      std::string value_text = token.text.substr(eq + 1);
      double value = 0.0;
      // pm axis accepts the polarization letters as sugar for 0/1.
      if (decl.kind == Kind::Pm && key == "axis" && (value_text == "H" || value_text == "V")) {
        value = value_text == "V" ? 1.0 : 0.0;
      } else if (!parse_number(value_text, value)) {
        add_error(diagnostics, line_number, token.column,
                  "param '" + key + "' has non-numeric value '" + value_text + "'");
        line_ok = false;
        continue;
      }
      auto [it, inserted] = decl.params.emplace(key, value);
      if (!inserted) {
        add_error(diagnostics, line_number, token.column,
                  "duplicate param '" + key + "' on '" + decl.name + "'");
        line_ok = false;
      }
    }
    if (!line_ok) continue;
    netlist.decls.push_back(std::move(decl));
    where.decl_pos.emplace_back(line_number, tokens[0].column);
  }

  std::vector<Diagnostic> semantic = validate_impl(netlist, where);
  diagnostics.insert(diagnostics.end(), semantic.begin(), semantic.end());

  ParseResult result;
  bool any_error = std::any_of(diagnostics.begin(), diagnostics.end(),
                               [](const Diagnostic& d) {
                                 return d.severity == Severity::Error;
                               });
  result.diagnostics = std::move(diagnostics);
  if (!any_error) result.netlist = std::move(netlist);
  return result;
}

std::vector<Diagnostic> validate(const Netlist& netlist) {
  return validate_impl(netlist, SourceMap{});
}

std::string serialize(const Netlist& netlist) {
  std::vector<const ComponentDecl*> decls;
  decls.reserve(netlist.decls.size());
  for (const ComponentDecl& decl : netlist.decls) decls.push_back(&decl);
  std::sort(decls.begin(), decls.end(),
            [](const ComponentDecl* a, const ComponentDecl* b) {
              return a->name < b->name;
            });

  std::vector<std::string> connection_lines;
  connection_lines.reserve(netlist.connections.size());
  for (const Connection& conn : netlist.connections) {
    connection_lines.push_back(render_connection(conn));
  }
  std::sort(connection_lines.begin(), connection_lines.end());

  std::ostringstream out;
  out << "# sagnet v1\n";
  for (const ComponentDecl* decl : decls) {
    out << to_string(decl->kind) << " " << decl->name;
    for (const auto& [key, value] : decl->params) {
      out << " " << key << "=" << format_number(value);
    }
    out << "\n";
  }
  for (const std::string& line : connection_lines) {
    out << line << "\n";
  }
  return out.str();
}

Netlist sagnac_preset(const engine::SwitchConfig& config) {
  constexpr double kQuarterTurn = 0.785398163;  // pi/4 at canonical precision

  Netlist n;
  auto add = [&n](const char* name, Kind kind,
                  std::initializer_list<std::pair<const char*, double>> params = {}) {
    ComponentDecl decl;
    decl.name = name;
    decl.kind = kind;
    for (const auto& [key, value] : params) decl.params.emplace(key, value);
    n.decls.push_back(std::move(decl));
  };
  auto wire = [&n](const char* from, const char* to) {
    auto split = [](const char* text) {
      std::string s(text);
      std::size_t dot = s.find('.');
      return PortRef{s.substr(0, dot), s.substr(dot + 1)};
    };
    n.connections.push_back({split(from), split(to)});
  };

  add("src", Kind::Source);
  add("prep", Kind::Hwp, {{"angle", 0.0}});
  add("circ", Kind::Circulator);
  add("bs", Kind::Bs, {{"ratio", 0.5}});
  add("pc_a", Kind::Pc, {{"a", 0.0}, {"b", 0.0}, {"c", 0.0}});
  add("pbs_a", Kind::Pbs);
  add("wp_a", Kind::Hwp, {{"angle", kQuarterTurn}});
  add("pm1", Kind::Pm, {{"phase", 0.0}, {"axis", 1.0}});
  add("pm2", Kind::Pm, {{"phase", 0.0}, {"axis", 1.0}});
  add("wp_b", Kind::Hwp, {{"angle", kQuarterTurn}});
  add("pbs_b", Kind::Pbs);
  add("delay_b", Kind::Fiber,
      {{"length_m", config.delay_length}, {"group_index", config.group_index}});
  add("pc_b", Kind::Pc, {{"a", 0.0}, {"b", kQuarterTurn}, {"c", 0.0}});
  add("att_1", Kind::Att, {{"loss_db", config.effective_loss_d1()}});
  add("att_2", Kind::Att, {{"loss_db", config.effective_loss_d2()}});
  add("d1", Kind::Detector);
  add("d2", Kind::Detector);
  add("dt", Kind::Detector);

  // Preparation stage and readout.
  wire("src.out", "prep.a");
  wire("prep.b", "circ.p1");
  wire("circ.p2", "bs.p1");
  wire("circ.p3", "att_1.a");
  wire("att_1.b", "d1.in");
  wire("bs.p2", "att_2.a");
  wire("att_2.b", "d2.in");
  wire("src.herald", "dt.in");

  // Clockwise entry: short arm into the crossed modulator structure.
  wire("bs.p3", "pc_a.a");
  wire("pc_a.b", "pbs_a.p1");
  wire("pbs_a.p3", "wp_a.a");
  wire("wp_a.b", "pm1.a");
  wire("pm1.b", "pbs_b.p4");
  wire("pbs_a.p4", "pm2.a");
  wire("pm2.b", "wp_b.a");
  wire("wp_b.b", "pbs_b.p3");

  // Counter-clockwise entry: delay fiber, then the swap controller.
  wire("bs.p4", "delay_b.a");
  wire("delay_b.b", "pc_b.a");
  wire("pc_b.b", "pbs_b.p1");

  return n;
}

}  // namespace sagsim::netlist
