#include "oracles.hpp"

#include <doctest.h>

using namespace dtprs;
using namespace oracle;

namespace {

bool has_step_into(const System& sys, const DataTree& t1, const DataTree& t) {
  for (const auto& r : sys.rules)
    for (const auto& w : enabled(sys, r, t1, ExecPolicy::serial()))
      if (embeds(t, w.result)) return true;
  return false;
}

}  // namespace

TEST_CASE("basis elements are minimal predecessors inside Delta") {
  Rng rng(71);
  int checked = 0;
  for (int i = 0; checked < 30 && i < 500; ++i) {
    const System sys = random_positive(rng, i);
    const auto t = random_delta_tree(rng, sys, 5);
    if (!t) continue;
    const Basis b = pred_basis(sys, *t, 8);
    CAPTURE(print_system(sys));
    CAPTURE(print_tree(*t));
    for (std::size_t x = 0; x < b.trees.size(); ++x) {
      CHECK(satisfies_invariant(sys, b.trees[x]));
      CHECK(within_k(sys, b.trees[x]));
      CHECK(has_step_into(sys, b.trees[x], *t));
      for (std::size_t y = 0; y < b.trees.size(); ++y)
        if (x != y) CHECK_FALSE(embeds(b.trees[x], b.trees[y]));
    }
    ++checked;
  }
  CHECK(checked == 30);
}

TEST_CASE("pred_basis matches the exhaustive oracle") {
  Rng rng(72);
  int checked = 0;
  for (int i = 0; checked < 15 && i < 400; ++i) {
    const System sys = random_positive(rng, i);
    const auto t = random_delta_tree(rng, sys, 4);
    if (!t) continue;
    std::vector<DataTree> small;
    for (const auto& x : pred_basis(sys, *t, 5).trees)
      if (x.size() <= 5) small.push_back(x);
    CAPTURE(print_system(sys));
    CAPTURE(print_tree(*t));
    CHECK(same_classes(small, exhaustive_pred(sys, *t, 5)));
    ++checked;
  }
  CHECK(checked == 15);
}

TEST_CASE("pattern basis") {
  const System sys = load_system("playcom-reduced-fixed.dtprs");
  const TreePattern bug = load_pattern("playcom-reduced-bug.dtp");
  const Basis b = pattern_basis(sys, bug, 16);
  CHECK_FALSE(b.trees.empty());
  for (const auto& t : b.trees) {
    CHECK(matches_any(bug, t));
    CHECK(satisfies_invariant(sys, t));
  }
  CHECK(pred_size_bound(sys, b.trees.at(0)) > 16);
}

TEST_CASE("symbolic initial trees") {
  const System sym = parse_system(
      "system y { alphabet { r, a } dtd { root: r; r -> |a| >= 1; } bounds { depth: 2; simple-path: none; } "
      "init symbolic { formula: [r]([a]($X)); cap: 4; } }");
  const auto ts = symbolic_init_trees(sym, *sym.init.symbolic);
  CHECK_FALSE(ts.empty());
  for (const auto& t : ts) {
    CHECK(t.size() <= 4);
    CHECK(satisfies_invariant(sym, t));
    CHECK(eval_formula(sym.init.symbolic->formula, t));
  }
  SymbolicInit bad = *sym.init.symbolic;
  bad.cap = 0;
  CHECK_THROWS_AS(symbolic_init_trees(sym, bad), UsageError);
}
