#include "oracles.hpp"

#include <doctest.h>

using namespace dtprs;
using namespace oracle;

TEST_CASE("generator input errors") {
  CHECK_THROWS_AS(gen_pcp({}), UsageError);
  CHECK_THROWS_AS(gen_pcp({{"ab", ""}}), UsageError);
  CHECK_THROWS_AS(gen_pcp({{"ac", "a"}}), UsageError);
  CHECK_THROWS_AS(gen_pcp({{"a", "ab"}, {"b", "bb"}}), UsageError);
}

TEST_CASE("generated systems parse and are forward-only") {
  const PcpSystem gen = gen_pcp({{"aba", "a"}, {"aba", "bb"}, {"b", "abb"}});
  const System sys = parse_system(gen.source);
  CHECK_FALSE(sys.path_bound);
  const ValidationReport r = validate(sys);
  CHECK(r.guards_positive);
  CHECK(r.invariant_positive);
  CHECK_FALSE(r.has_path_bound);
  CHECK_FALSE(r.positive_eligible);
  for (const auto& rule : sys.rules) CHECK(rule.guard.is_true());
  CHECK(parse_pattern(gen.target).label(0) == PatternLabel::tag("√"));

  // The pair (aba, bb) in the far case: four located positions, one appended position per letter.
  const Rule* far = sys.rule("p2_far_aa");
  REQUIRE(far);
  CHECK(far->locator.base.children(0).size() == 4);
  CHECK(far->forest("F")->size() == 3);
}

TEST_CASE("bmc agrees with a brute-force PCP solver") {
  Rng rng(81);
  const std::vector<std::string> words{"a", "b", "aa", "ab", "ba", "bb", "aab", "aba", "abb", "baa", "bab", "bba"};
  int solved = 0, unsolved = 0;
  for (int i = 0; i < 20000 && (solved < 4 || unsolved < 4); ++i) {
    PcpPairs pairs;
    for (int k = 0; k < 3; ++k)
      pairs.emplace_back(words[uniform(rng, 0, 11)], words[uniform(rng, 0, 11)]);
    const auto& [u1, v1] = pairs.front();
    if (v1.size() >= u1.size() || u1.compare(0, v1.size(), v1) != 0) continue;
    const auto sol = pcp_solve_shaped(pairs, 5);
    if (sol ? solved >= 4 : unsolved >= 4) continue;
    const PcpSystem gen = gen_pcp(pairs);
    const System sys = parse_system(gen.source);
    const TreePattern target = parse_pattern(gen.target);
    const Verdict v = bmc(sys, target, sys.init, 4);
    CAPTURE(gen.source);
    if (sol) {
      REQUIRE(v.outcome == Outcome::Reachable);
      CHECK(v.trace.steps.size() + 1 == sol->size());
      CHECK(verify_trace(sys, v.trace, &target));
      ++solved;
    } else {
      CHECK(v.outcome != Outcome::Reachable);
      ++unsolved;
    }
  }
  CHECK(solved == 4);
  CHECK(unsolved == 4);
}
