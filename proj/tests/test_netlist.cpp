#include "sagsim/netlist.hpp"

#include <string>
#include <vector>

#include <doctest.h>

#include "sagsim/rng.hpp"
#include "sagsim/switch_config.hpp"
#include "support/netlist_gen.hpp"

using namespace sagsim::netlist;
using netlist_gen::random_netlist;
using sagsim::rng::Stream;

namespace {

/// Checks that `text` fails to parse and that some diagnostic carries the
/// expected substring, returning that diagnostic for position checks.
Diagnostic expect_error(const std::string& text, const std::string& needle) {
  ParseResult result = parse(text);
  REQUIRE_FALSE(result.ok());
  for (const Diagnostic& d : result.diagnostics) {
    if (d.message.find(needle) != std::string::npos) return d;
  }
  for (const Diagnostic& d : result.diagnostics) {
    CAPTURE(d.message);
    CHECK(d.message.find(needle) != std::string::npos);
  }
  return {};
}

}  // namespace

TEST_CASE("kind keywords round-trip") {
  for (Kind kind : {Kind::Bs, Kind::Pbs, Kind::Hwp, Kind::Pm, Kind::Pc, Kind::Att,
                    Kind::Fiber, Kind::Circulator, Kind::Source, Kind::Detector}) {
    auto back = kind_from_string(to_string(kind));
    REQUIRE(back.has_value());
    CHECK(*back == kind);
  }
  CHECK_FALSE(kind_from_string("laser").has_value());
  CHECK_FALSE(kind_from_string("BS").has_value());  // keywords are lowercase
}

TEST_CASE("ports follow the component kind") {
  CHECK(ports_of(Kind::Bs) == std::vector<std::string>{"p1", "p2", "p3", "p4"});
  CHECK(ports_of(Kind::Circulator) == std::vector<std::string>{"p1", "p2", "p3"});
  CHECK(ports_of(Kind::Source) == std::vector<std::string>{"out", "herald"});
  CHECK(ports_of(Kind::Detector) == std::vector<std::string>{"in"});
  CHECK(ports_of(Kind::Fiber) == std::vector<std::string>{"a", "b"});
}

TEST_CASE("a small netlist parses with comments and blank lines") {
  ParseResult result = parse(
      "# comment only\n"
      "\n"
      "hwp w angle=0.5   # trailing comment\n"
      "bs b ratio=0.25\n"
      "connect w.b -> b.p1\n");
  REQUIRE(result.ok());
  CHECK(result.diagnostics.empty());
  const Netlist& n = *result.netlist;
  REQUIRE(n.decls.size() == 2);
  REQUIRE(n.connections.size() == 1);
  const ComponentDecl* w = n.find("w");
  REQUIRE(w != nullptr);
  CHECK(w->kind == Kind::Hwp);
  CHECK(w->param_or("angle", 0.0) == 0.5);
  CHECK(n.connections[0].from == PortRef{"w", "b"});
  CHECK(n.connections[0].to == PortRef{"b", "p1"});
}

TEST_CASE("pm accepts H and V as axis sugar") {
  ParseResult result = parse("pm m phase=0 axis=V\npm m2 phase=0 axis=H\n");
  REQUIRE(result.ok());
  CHECK(result.netlist->find("m")->param_or("axis", -1.0) == 1.0);
  CHECK(result.netlist->find("m2")->param_or("axis", -1.0) == 0.0);
}

TEST_CASE("parser reports located errors") {
  SUBCASE("unknown kind") {
    Diagnostic d = expect_error("bogus x\n", "unknown component kind 'bogus'");
    CHECK(d.line == 1);
    CHECK(d.column == 1);
  }
  SUBCASE("missing component name") {
    expect_error("bs\n", "expected a component name after 'bs'");
  }
  SUBCASE("missing required param") {
    Diagnostic d = expect_error("pm mod1 phase=0\n", "missing required param 'axis'");
    CHECK(d.line == 1);
  }
  SUBCASE("out-of-range ratio") {
    expect_error("bs b ratio=1.5\n", "must lie strictly between 0 and 1");
  }
  SUBCASE("out-of-range axis") {
    expect_error("pm m phase=0 axis=2\n", "must be 0 (H) or 1 (V)");
  }
  SUBCASE("negative loss") { expect_error("att a loss_db=-1\n", "must be non-negative"); }
  SUBCASE("group index below vacuum") {
    expect_error("fiber f length_m=1 group_index=0.5\n", "must be at least 1");
  }
  SUBCASE("non-numeric value") {
    expect_error("hwp w angle=abc\n", "non-numeric value 'abc'");
  }
  SUBCASE("unknown param") { expect_error("hwp w tilt=1\n", "unknown param 'tilt'"); }
  SUBCASE("duplicate param") {
    expect_error("hwp w angle=1 angle=2\n", "duplicate param 'angle'");
  }
  SUBCASE("stray token") { expect_error("hwp w angle\n", "expected key=value"); }
  SUBCASE("duplicate component name") {
    Diagnostic d = expect_error("hwp w angle=1\nhwp w angle=2\n",
                                "duplicate component name 'w'");
    CHECK(d.line == 2);
  }
  SUBCASE("malformed connect") {
    expect_error("connect a.b\n", "expected 'connect <name>.<port> -> <name>.<port>'");
  }
  SUBCASE("malformed port reference") {
    expect_error("hwp w angle=1\nhwp x angle=1\nconnect wb -> x.a\n",
                 "malformed port reference 'wb'");
  }
  SUBCASE("undeclared component") {
    Diagnostic d = expect_error("hwp w angle=1\nconnect w.b -> q.p1\n",
                                "undeclared component 'q'");
    CHECK(d.line == 2);
  }
  SUBCASE("unknown port") {
    expect_error("hwp w angle=1\nbs b ratio=0.5\nconnect w.b -> b.p9\n",
                 "bs 'b' has no port 'p9'");
  }
  SUBCASE("port reuse names the first use") {
    Diagnostic d = expect_error(
        "hwp w angle=1\nbs b ratio=0.5\nconnect w.b -> b.p1\nconnect w.b -> b.p2\n",
        "port w.b is already connected (line 3)");
    CHECK(d.line == 4);
  }
}

TEST_CASE("parsing recovers per line and reports every error") {
  ParseResult result = parse("bogus x\nhwp w angle=abc\nhwp ok angle=1\n");
  CHECK_FALSE(result.ok());
  REQUIRE(result.diagnostics.size() >= 2);
  CHECK(result.diagnostics[0].line == 1);
  CHECK(result.diagnostics[1].line == 2);
}

TEST_CASE("format_diagnostic renders file, position and severity") {
  Diagnostic d{3, 7, Severity::Error, "boom"};
  CHECK(format_diagnostic("f.sagnet", d) == "f.sagnet:3:7: error: boom");
  Diagnostic w{1, 1, Severity::Warning, "odd"};
  CHECK(format_diagnostic("x", w) == "x:1:1: warning: odd");
}

TEST_CASE("serialize emits the canonical sorted form") {
  ParseResult result = parse("hwp w angle=0.5\nbs b ratio=0.25\nconnect w.b -> b.p1\n");
  REQUIRE(result.ok());
  CHECK(serialize(*result.netlist) ==
        "# sagnet v1\n"
        "bs b ratio=0.25\n"
        "hwp w angle=0.5\n"
        "connect w.b -> b.p1\n");
}

TEST_CASE("serialize is idempotent") {
  Stream s(31);
  for (int i = 0; i < 50; ++i) {
    Netlist n = random_netlist(s);
    std::string once = serialize(n);
    ParseResult again = parse(once);
    REQUIRE(again.ok());
    CHECK(serialize(*again.netlist) == once);
  }
}

TEST_CASE("parse inverts serialize structurally") {
  Stream s(32);
  for (int i = 0; i < 200; ++i) {
    Netlist n = random_netlist(s);
    ParseResult back = parse(serialize(n));
    REQUIRE(back.ok());
    CHECK(*back.netlist == n);
  }
}

TEST_CASE("netlist equality ignores declaration and connection order") {
  ParseResult a = parse("hwp w angle=1\nbs b ratio=0.5\nconnect w.b -> b.p1\nconnect w.a -> b.p2\n");
  ParseResult b = parse("bs b ratio=0.5\nhwp w angle=1\nconnect w.a -> b.p2\nconnect w.b -> b.p1\n");
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(*a.netlist == *b.netlist);

  ParseResult c = parse("hwp w angle=2\nbs b ratio=0.5\nconnect w.b -> b.p1\nconnect w.a -> b.p2\n");
  REQUIRE(c.ok());
  CHECK_FALSE(*a.netlist == *c.netlist);  // a param value differs
}

TEST_CASE("the switch preset is a valid netlist with the expected topology") {
  sagsim::engine::SwitchConfig config;
  Netlist preset = sagnac_preset(config);
  CHECK(validate(preset).empty());
  CHECK(preset.decls.size() == 18);
  CHECK(preset.connections.size() == 19);

  // The two driven modulators, both on the V axis.
  const ComponentDecl* pm1 = preset.find("pm1");
  const ComponentDecl* pm2 = preset.find("pm2");
  REQUIRE(pm1 != nullptr);
  REQUIRE(pm2 != nullptr);
  CHECK(pm1->kind == Kind::Pm);
  CHECK(pm1->param_or("axis", -1.0) == 1.0);
  CHECK(pm2->param_or("axis", -1.0) == 1.0);

  // Delay fiber carries the configured length and index.
  const ComponentDecl* fiber = preset.find("delay_b");
  REQUIRE(fiber != nullptr);
  CHECK(fiber->param_or("length_m", 0.0) == 100.0);
  CHECK(fiber->param_or("group_index", 0.0) == 1.468);

  // Signal, complementary and herald detectors.
  int detectors = 0;
  for (const ComponentDecl& decl : preset.decls)
    if (decl.kind == Kind::Detector) ++detectors;
  CHECK(detectors == 3);

  // Output attenuators carry the lumped loss.
  CHECK(preset.find("att_1")->param_or("loss_db", 0.0) == 5.0);
  CHECK(preset.find("att_2")->param_or("loss_db", 0.0) == 5.0);
}

TEST_CASE("preset parameters follow the configuration") {
  sagsim::engine::SwitchConfig config;
  config.delay_length = 42.0;
  config.group_index = 1.5;
  config.loss_d1_db = 7.25;
  Netlist preset = sagnac_preset(config);
  CHECK(preset.find("delay_b")->param_or("length_m", 0.0) == 42.0);
  CHECK(preset.find("delay_b")->param_or("group_index", 0.0) == 1.5);
  CHECK(preset.find("att_1")->param_or("loss_db", 0.0) == 7.25);
  CHECK(preset.find("att_2")->param_or("loss_db", 0.0) == 5.0);
}

TEST_CASE("preset serialization round-trips byte for byte") {
  sagsim::engine::SwitchConfig config;
  Netlist preset = sagnac_preset(config);
  std::string text = serialize(preset);
  ParseResult back = parse(text);
  REQUIRE(back.ok());
  CHECK(serialize(*back.netlist) == text);
  CHECK(*back.netlist == preset);
}
