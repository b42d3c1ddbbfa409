#include "oracles.hpp"

#include <doctest.h>

using namespace dtprs;
using namespace oracle;

TEST_CASE("canonical print basics") {
  CHECK(canonical_print(parse_tree("[a]")) == "[a]");
  CHECK(canonical_print(parse_tree("[a]([c], [b](@9), @4)")) == canonical_print(parse_tree("[a](@0, [b](@3), [c])")));
  CHECK(canonical_print(parse_tree("[a](@1, @1)")) != canonical_print(parse_tree("[a](@1, @2)")));
}

TEST_CASE("canonical print is idempotent and renaming invariant") {
  Rng rng(51);
  TreeGen g;
  for (int i = 0; i < 200; ++i) {
    const DataTree t = random_tree(rng, g);
    const std::string p = canonical_print(t);
    CHECK(canonical_print(parse_tree(p)) == p);
    CHECK(canonical_print(canonical_form(t)) == p);
    CHECK(equivalent(t, canonical_form(t)));
    CHECK(canonical_print(shuffled_copy(rng, t, 11)) == p);
  }
}

TEST_CASE("canonical print separates inequivalent trees") {
  // Exhaustive: every class of small trees over two tags gets its own print.
  const auto trees = all_trees({"a", "b"}, {"a"}, 5, 4);
  std::set<std::string> prints;
  for (const auto& t : trees) prints.insert(canonical_print(t));
  CHECK(prints.size() == trees.size());
  for (std::size_t i = 0; i < trees.size(); i += 7)
    for (std::size_t j = i + 1; j < trees.size(); j += 5) CHECK_FALSE(equivalent(trees[i], trees[j]));
}

TEST_CASE("state set deduplicates equivalent trees") {
  Rng rng(52);
  TreeGen g;
  StateSet s;
  const DataTree t = random_tree(rng, g);
  CHECK(s.insert(t).second);
  CHECK_FALSE(s.insert(shuffled_copy(rng, t, 4)).second);
  CHECK(s.find(shuffled_copy(rng, t, 8)) == std::optional<std::size_t>(0));
  CHECK(s.size() == 1);
  CHECK(raw_key(t) == raw_key(t));
}
