#include "oracles.hpp"

#include <doctest.h>

using namespace dtprs;
using namespace oracle;

namespace {

DataTree fig3() { return load_tree(case_path("fig3.dtree")); }

// Every node map from pattern nodes to tree nodes, filtered by the matching conditions.
std::vector<Matching> brute_matchings(const TreePattern& p, const DataTree& t, bool injective) {
  std::vector<Matching> out;
  const std::size_t n = p.size();
  std::vector<NodeId> img(n, 0);
  const auto tn = static_cast<NodeId>(t.size());
  while (true) {
    bool ok = img[0] == 0;
    Valuation val;
    for (std::size_t i = 0; i < n && ok; ++i) {
      const NodeId v = static_cast<NodeId>(i);
      const PatternLabel& l = p.label(v);
      const Label& tl = t.label(img[i]);
      switch (l.kind) {
        case PatternLabel::Kind::Tag: ok = tl.is_tag() && tl.tag == l.name; break;
        case PatternLabel::Kind::Wildcard: ok = tl.is_tag(); break;
        case PatternLabel::Kind::Data: ok = tl.is_data() && tl.value == l.value; break;
        case PatternLabel::Kind::Variable: {
          ok = tl.is_data();
          if (!ok) break;
          auto [it, fresh] = val.emplace(l.name, tl.value);
          ok = fresh || it->second == tl.value;
          break;
        }
      }
      if (!ok || v == p.root()) continue;
      const NodeId pi = img[p.parent(v)];
      ok = p.edge(v) == Edge::Child ? t.parent(img[i]) == pi : t.is_proper_ancestor(pi, img[i]);
    }
    if (ok && injective) {
      std::set<NodeId> s(img.begin(), img.end());
      ok = s.size() == n;
    }
    if (ok && p.cond().eval(val)) out.push_back(Matching{img, val});
    std::size_t k = 0;
    while (k < n && ++img[k] == tn) img[k++] = 0;
    if (k == n) break;
  }
  return out;
}

std::set<std::vector<NodeId>> images(const std::vector<Matching>& ms) {
  std::set<std::vector<NodeId>> s;
  for (const auto& m : ms) s.insert(m.image);
  return s;
}

TreePattern random_pattern(Rng& rng) {
  static const char* tags[] = {"a", "b"};
  TreePattern p(PatternLabel::tag(tags[uniform(rng, 0, 1)]));
  const int n = uniform(rng, 1, 4);
  for (int i = 1; i < n; ++i) {
    std::vector<NodeId> hosts;
    for (NodeId v = 0; v < static_cast<NodeId>(p.size()); ++v)
      if (p.label(v).is_tag_like()) hosts.push_back(v);
    const NodeId h = hosts[uniform(rng, 0, static_cast<int>(hosts.size()) - 1)];
    const Edge e = coin(rng, 0.3) ? Edge::Descendant : Edge::Child;
    switch (uniform(rng, 0, 3)) {
      case 0: p.add_child(h, PatternLabel::wildcard(), e); break;
      case 1: p.add_child(h, PatternLabel::variable(coin(rng) ? "X" : "Y"), e); break;
      default: p.add_child(h, PatternLabel::tag(tags[uniform(rng, 0, 1)]), e); break;
    }
  }
  const auto vars = p.variables();
  if (vars.size() == 2 && coin(rng)) p.set_cond(coin(rng) ? DataCond::eq("X", "Y") : DataCond::neq("X", "Y"));
  return p;
}

}  // namespace

TEST_CASE("match_all examples") {
  const DataTree t = fig3();
  CHECK(match_all(TreePattern(PatternLabel::wildcard()), t).size() == 1);

  const TreePattern twice = parse_pattern("[Play.com](-[PId]($X), -[PId]($Y)) where $X == $Y");
  const auto ms = match_all(twice, t);
  std::set<std::set<NodeId>> pairs;
  for (const auto& m : ms) pairs.insert({m.image[1], m.image[2]});
  const auto cart_pids = match_injective(parse_pattern("[Play.com]([Cart]([products]([PId]($X), [PId]($Y))))"), t);
  REQUIRE_FALSE(cart_pids.empty());
  CHECK(pairs.count({cart_pids[0].image[3], cart_pids[0].image[4]}) == 1);

  const TreePattern bb = parse_pattern("[a]([b], [b])");
  const DataTree ab = parse_tree("[a]([b])");
  CHECK(match_all(bb, ab).size() == 1);  // both pattern leaves on the single b
  CHECK(match_all(bb, ab).size() == brute_matchings(bb, ab, false).size());
  CHECK(match_injective(bb, ab).empty());
}

TEST_CASE("relative patterns need an anchor") {
  const TreePattern rel = parse_pattern("[a]([b{self}])");
  CHECK_THROWS_AS(match_all(rel, parse_tree("[a]([b])")), UsageError);
  const DataTree t = parse_tree("[a]([b], [b]([c]))");
  CHECK(match_all(rel, t, 1).size() == 1);
  CHECK(match_all(rel, t, 0).empty());
}

TEST_CASE("shape-identical pattern matches injectively") {
  const TreePattern p = parse_pattern("[a]([b]($X), [c]($Y), $Z)");
  const DataTree t = parse_tree("[a]([b](@1), [c](@2), @3)");
  CHECK_FALSE(match_injective(p, t).empty());
}

TEST_CASE("matchings agree with brute force on random inputs") {
  Rng rng(21);
  TreeGen g;
  g.tags = {"a", "b"};
  g.max_nodes = 6;
  g.max_values = 2;
  int nonempty = 0;
  for (int i = 0; i < 300; ++i) {
    const TreePattern p = random_pattern(rng);
    const DataTree t = random_tree(rng, g);
    const auto all = match_all(p, t);
    const auto inj = match_injective(p, t);
    CHECK(images(all) == images(brute_matchings(p, t, false)));
    CHECK(images(inj) == images(brute_matchings(p, t, true)));
    for (const auto& m : inj) CHECK(images(all).count(m.image) == 1);
    if (!all.empty()) ++nonempty;
  }
  CHECK(nonempty > 20);
}

TEST_CASE("positive atoms are upward closed and renaming invariant") {
  Rng rng(22);
  TreeGen g;
  g.tags = {"a", "b"};
  g.max_nodes = 6;
  g.max_values = 3;
  for (int i = 0; i < 200; ++i) {
    const TreePattern p = random_pattern(rng);
    const DataTree t = random_tree(rng, g);
    const DataTree big = random_extension(rng, t, g, uniform(rng, 1, 3));
    if (matches_any(p, t)) CHECK(matches_any(p, big));
    CHECK(match_all(p, t).size() == match_all(p, shuffled_copy(rng, t, 5)).size());
  }
}

TEST_CASE("formulas") {
  const DataTree t = fig3();
  CHECK(eval_formula(PatternFormula::truth(), t));
  CHECK_FALSE(eval_formula(PatternFormula::falsity(), t));
  const TreePattern cart = parse_pattern("[Play.com]([Cart]([select]))");
  const TreePattern paid = parse_pattern("[Play.com]([Order]([paid]))");
  CHECK_FALSE(eval_formula(PatternFormula::negate(PatternFormula::of(cart)), t));
  const PatternFormula guard = PatternFormula::conj(
      {PatternFormula::of(cart), PatternFormula::negate(PatternFormula::of(paid))});
  CHECK(eval_formula(guard, t) == (matches_any(cart, t) && !matches_any(paid, t)));
  CHECK(eval_formula(guard, t));
  CHECK(eval_formula(PatternFormula::disj({PatternFormula::of(paid), PatternFormula::of(cart)}), t));
}

TEST_CASE("queries") {
  const DataTree t = fig3();
  Query none{parse_pattern("[Play.com]([Order]($X))"), TemplateTree(TemplateLabel::variable("X"))};
  CHECK(eval_query(none, t, 0).empty());

  const System play = load_system("playcom.dtprs");
  const Query& q = play.rule("Check-out")->queries.at(0).second;
  const auto cart = match_injective(parse_pattern("[Play.com]([Cart])"), t).at(0).image[1];
  const auto bill = eval_query(q, t, cart);
  REQUIRE(bill.size() == 1);
  CHECK(bill[0].size() == 1);
  CHECK(bill[0].label(0) == Label::make_data(5));
}

TEST_CASE("queries agree with brute-force instantiation") {
  Rng rng(23);
  TreeGen g;
  g.tags = {"a", "b"};
  g.max_nodes = 7;
  g.max_values = 3;
  for (int i = 0; i < 150; ++i) {
    TreePattern body = random_pattern(rng);
    const auto vars = body.variables();
    if (vars.empty()) continue;
    TemplateTree head(TemplateLabel::tag("r"));
    for (const auto& v : vars) head.add_child(head.root(), TemplateLabel::variable(v));
    const DataTree t = random_tree(rng, g);
    const auto got = eval_query(Query{body, head}, t, 0);
    std::set<std::string> expected, seen;
    for (const auto& m : brute_matchings(body, t, false)) expected.insert(print_tree_raw(instantiate(head, m.valuation).at(0)));
    for (const auto& r : got) CHECK(seen.insert(print_tree_raw(r)).second);
    CHECK(seen == expected);
  }
}
