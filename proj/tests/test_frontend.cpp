#include "oracles.hpp"

#include <doctest.h>

using namespace dtprs;
using namespace oracle;

namespace {

const std::string kHead =
    "system s {\n  alphabet { r, a, b }\n  dtd { root: r; }\n  bounds { depth: 3; simple-path: 8; }\n"
    "  init { [r]; }\n";

DiagCode code_of(const std::string& text) {
  try {
    parse_system(text);
  } catch (const ParseError& e) {
    CHECK(e.line() >= 1);
    CHECK(e.column() >= 1);
    return e.code();
  }
  FAIL("no parse error for: " << text);
  return DiagCode::Syntax;
}

DiagCode rule_error(const std::string& rule) { return code_of(kHead + rule + "\n}\n"); }

}  // namespace

TEST_CASE("trees and patterns") {
  const DataTree t = parse_tree("[a](@1,@1)");
  CHECK(t.size() == 3);
  CHECK(t.data_values().size() == 1);

  const TreePattern p = parse_pattern("[a](-[b]($X))");
  REQUIRE(p.size() == 3);
  CHECK(p.edge(1) == Edge::Descendant);
  CHECK(p.label(2) == PatternLabel::variable("X"));

  const TreePattern w = parse_pattern("[*]([a]($X), $Y) where $X != $Y || $X == $Y");
  CHECK(w.label(0) == PatternLabel::wildcard());
  CHECK(w.cond().op == DataCond::Op::Or);
  CHECK(print_pattern(parse_pattern(print_pattern(w))) == print_pattern(w));

  const DataTree fig3 = load_tree(case_path("fig3.dtree"));
  const LabeledGraph g = graph_of(fig3);
  int shared = 0;
  for (int v = static_cast<int>(fig3.size()); v < static_cast<int>(g.vertex_count()); ++v)
    if (g.degree(v) > 1) ++shared;
  CHECK(shared == 2);  // the customer id and the product id
}

TEST_CASE("systems") {
  const System empty = parse_system(kHead + "}\n");
  CHECK(empty.rules.empty());
  CHECK(empty.path_bound == 8);

  const System play = load_system("playcom.dtprs");
  CHECK(play.rules.size() == 7);
  const Forest& f = *play.rule("create-cart")->forest("F");
  CHECK(f[0].label(0) == TemplateLabel::tag("Cart"));
  CHECK(parse_system(print_system(play)) == play);
  CHECK(print_system(parse_system(print_system(play))) == print_system(play));

  const System sym = parse_system(
      "system y { alphabet { r, a } dtd { root: r; } bounds { depth: 2; simple-path: none; } "
      "init symbolic { formula: [r]([a]); cap: 3; } }");
  REQUIRE(sym.init.symbolic);
  CHECK(sym.init.symbolic->cap == 3);
  CHECK_FALSE(sym.path_bound);
  CHECK(parse_system(print_system(sym)) == sym);
}

TEST_CASE("every packaged case parses and round trips") {
  for (const char* f : {"playcom.dtprs", "playcom-fixed.dtprs", "playcom-instrumented.dtprs",
                        "playcom-reduced-fixed.dtprs", "loop.dtprs", "delete-only.dtprs", "reset-net.dtprs"}) {
    CAPTURE(f);
    const System s = load_system(f);
    CHECK(parse_system(print_system(s)) == s);
  }
  for (const char* f : {"playcom-bug.dtp", "playcom-reduced-bug.dtp"}) {
    const TreePattern p = load_pattern(f);
    CHECK(parse_pattern(print_pattern(p)) == p);
  }
}

TEST_CASE("diagnostics") {
  CHECK(code_of("system s { alphabet { r } % }") == DiagCode::Lexical);
  CHECK(code_of("system s { alphabet r }") == DiagCode::Syntax);
  CHECK(code_of("system s { alphabet { r } dtd { root: r; } init { [r]; } }") == DiagCode::Bounds);
  CHECK(rule_error("rule x { locator: [q]; }") == DiagCode::UnknownTag);
  CHECK(rule_error("rule x { locator: [r{append=G}]; }") == DiagCode::UndefinedForest);
  CHECK(rule_error("rule x { locator: [r]; query Q: [r]($X) ~> $Y; }") == DiagCode::HeadVariable);
  CHECK(rule_error("rule x { locator: [r]; query Q: [r]($X) ~> [a]; }") == DiagCode::HeadVariable);
  CHECK(rule_error("rule x { locator: [r]([a{del}]([b{ren=a}])); }") == DiagCode::DelConflict);
  CHECK(rule_error("rule x { locator: [r]($X([a])); }") == DiagCode::NonLeafVariable);
  CHECK(rule_error("rule x { locator: [r{append=F}]; forest F: [a](Q); }") == DiagCode::UndefinedQuery);
  CHECK(rule_error("rule x { locator: [r]; } rule x { locator: [r]; }") == DiagCode::Duplicate);
  CHECK(rule_error("rule x { locator: [r]([a]($X)) where $X == $Y; }") == DiagCode::CondVariable);
  CHECK(rule_error("rule x { locator: [r{frob}]; }") == DiagCode::Annotation);
  CHECK_THROWS_AS(parse_tree("[a]($X)"), ParseError);
  CHECK_THROWS_AS(parse_tree("[a](-[b])"), ParseError);
  CHECK_THROWS_AS(parse_tree("[a{del}]"), ParseError);
  CHECK(diag_code_name(DiagCode::Syntax) == "E002");
}
