#include "oracles.hpp"

#include <doctest.h>

using namespace dtprs;
using namespace oracle;

namespace {

DataTree fig3() { return load_tree(case_path("fig3.dtree")); }

Dtd dtd_of(const std::string& body) {
  const System s = parse_system("system d { alphabet { a, b, c } dtd { " + body +
                                " } bounds { depth: 4; simple-path: none; } init { [a]; } }");
  return s.dtd;
}

// Children tags must be mentioned by the parent's rule; unmentioned tags are unconstrained and
// can nest arbitrarily, which is why the invariant also carries the declared depth bound.
bool closed_under(const DataTree& t, const Dtd& d) {
  for (NodeId n = 1; n < static_cast<NodeId>(t.size()); ++n) {
    if (!t.label(n).is_tag()) continue;
    const auto it = d.rules.find(t.label(t.parent(n)).tag);
    if (it == d.rules.end()) return false;
    std::set<std::string> mentioned;
    it->second.collect_tags(mentioned);
    if (!mentioned.count(t.label(n).tag)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("tree construction and depth") {
  DataTree t = DataTree::with_root_tag("a");
  CHECK(depth(t) == 0);
  const NodeId b = t.add_tag(0, "b");
  t.add_data(b, 4);
  CHECK(depth(t) == 2);
  CHECK(t.size() == 3);
  CHECK(t.data_values() == std::vector<DataValue>{4});
  CHECK(depth(fig3()) == 4);
}

TEST_CASE("dtd_check") {
  const DataTree single = DataTree::with_root_tag("a");
  CHECK(dtd_check(single, dtd_of("root: a;")));
  CHECK_FALSE(dtd_check(single, dtd_of("root: a; a -> |b| >= 1;")));
  CHECK_FALSE(dtd_check(single, dtd_of("root: b;")));
  const System play = load_system("playcom.dtprs");
  CHECK(dtd_check(fig3(), play.dtd));
  DataTree bad = parse_tree("[Play.com]([CCatalog], [PCatalog]([Product]([PId](@1))))");
  CHECK_FALSE(dtd_check(bad, play.dtd));
}

TEST_CASE("dtd_check is invariant under data renaming") {
  Rng rng(11);
  const System play = load_system("playcom.dtprs");
  const DataTree t = fig3();
  for (int i = 0; i < 20; ++i) CHECK(dtd_check(shuffled_copy(rng, t, 17 * i), play.dtd));
}

TEST_CASE("dtd_depth_bound") {
  CHECK(dtd_depth_bound(dtd_of("root: a; a -> |b| >= 0;")) == 2);
  CHECK(dtd_depth_bound(dtd_of("root: a;")) == 1);
  const System play = load_system("playcom.dtprs");
  CHECK(dtd_depth_bound(play.dtd) == depth(fig3()));
  CHECK_THROWS_AS(dtd_depth_bound(dtd_of("root: a; a -> |b| >= 1; b -> |a| >= 0;")), RecursionError);
}

TEST_CASE("graph_of shapes") {
  const DataTree shared = parse_tree("[a](@7, @7)");
  const LabeledGraph g = graph_of(shared);
  CHECK(g.vertex_count() == 4);
  CHECK(g.degree(3) == 2);
  CHECK(g.label(3).kind == GraphLabel::Kind::Value);

  const LabeledGraph p = graph_of(parse_tree("[a](@5)"));
  CHECK(p.vertex_count() == 3);
  CHECK(p.label(0) == GraphLabel{GraphLabel::Kind::Tag, "a", 0});
  CHECK(p.label(1).kind == GraphLabel::Kind::DataLeaf);
  CHECK(p.label(1).depth == 1);
  CHECK(longest_simple_path(p) == 2);

  CHECK(longest_simple_path(graph_of(DataTree::with_root_tag("a"))) == 0);
  CHECK_THROWS_AS(graph_of(fig3(), 3), BoundViolation);
}

TEST_CASE("store configuration graph") {
  const DataTree t = fig3();
  const LabeledGraph g = graph_of(t);
  const auto vals = t.data_values();
  CHECK(g.vertex_count() == t.size() + vals.size());
  const int pid_vertex = static_cast<int>(t.size()) + 1;  // value @1 is the shared PId
  CHECK(g.degree(pid_vertex) == 3);
  CHECK(longest_simple_path(g) == naive_longest_path(g));
}

TEST_CASE("graph_of counts and longest path properties") {
  Rng rng(12);
  TreeGen gen;
  for (int i = 0; i < 150; ++i) {
    const DataTree t = random_tree(rng, gen);
    const LabeledGraph g = graph_of(t);
    std::size_t leaves = t.data_leaf_count();
    CHECK(g.vertex_count() == t.size() + t.data_values().size());
    CHECK(g.edge_count() == t.size() - 1 + leaves);
    const int lp = longest_simple_path(g);
    CHECK(lp >= depth(t));
    CHECK(lp == naive_longest_path(g));
  }
}

TEST_CASE("every tree accepted by a non-recursive DTD respects its depth bound") {
  const Dtd d = dtd_of("root: a; a -> |b| >= 1 || |c| >= 0; b -> |c| >= 0; c -> |dom| >= 1;");
  const int bound = dtd_depth_bound(d);
  CHECK(bound == 3);
  int checked = 0;
  for (const auto& t : all_trees({"a", "b", "c"}, {"a"}, 6, 6))
    if (dtd_check(t, d) && closed_under(t, d)) {
      ++checked;
      CHECK(depth(t) <= bound);
    }
  CHECK(checked > 10);
  CHECK(dtd_check(parse_tree("[a]([a]([a]([a])))"), d));
}
