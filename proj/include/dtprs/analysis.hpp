#pragma once

#include "dtprs/order.hpp"
#include "dtprs/parallel.hpp"
#include "dtprs/rewrite.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dtprs {

enum class Outcome : std::uint8_t { Reachable, Unreachable, Terminates, Nonterminating, Inconclusive };
std::string outcome_name(Outcome o);

struct Trace {
  DataTree start;
  std::vector<StepWitness> steps;

  const DataTree& state(std::size_t i) const { return i == 0 ? start : steps[i - 1].result; }
  const DataTree& last() const { return steps.empty() ? start : steps.back().result; }
};

struct Stats {
  std::size_t states = 0;      // trees explored or basis elements produced
  std::size_t max_basis = 0;
  std::size_t iterations = 0;
  double seconds = 0;
};

struct Verdict {
  Outcome outcome = Outcome::Inconclusive;
  std::string reason;
  Trace trace;
  // Nonterminating: trace.state(lasso_start) ⪯ trace.last() via lasso_embedding.
  std::size_t lasso_start = 0;
  Embedding lasso_embedding;
  Stats stats;
};

// 0 good verdict, 1 witness found, 2 inconclusive.
int exit_code(const Verdict& v);

struct ValidationReport {
  std::string system;
  bool dtd_non_recursive = false;
  std::vector<std::string> dtd_cycle;
  std::optional<int> derived_depth;
  bool dtd_positive = false;
  bool guards_positive = false;
  bool invariant_positive = false;
  bool has_path_bound = false;
  bool init_ok = true;
  bool positive_eligible = false;
  std::vector<std::string> notes;
  std::vector<std::string> violations;
};

ValidationReport validate(const System& sys);
std::string format_report(const ValidationReport& r);

// Keeps the ⪯-minimal trees, one per equivalence class, in first-seen order.
std::vector<DataTree> minimize(const std::vector<DataTree>& trees, const ExecPolicy& policy = default_policy());

struct Basis {
  std::vector<DataTree> trees;
  bool capped = false;  // some candidate was cut by the size cap
};

// Size bound on minimal predecessors: B^2 ((|Σ|+1) max(Δ))^B (|L| + |G| + |T| max|Q|), saturating.
double pred_size_bound(const System& sys, const DataTree& t);

// Minimal Δ-trees with a one-step successor in ↑{t}.
Basis pred_basis(const System& sys, const DataTree& t, int size_cap, const ExecPolicy& policy = default_policy());
// Minimal Δ-trees matched by p (within size_cap nodes).
Basis pattern_basis(const System& sys, const TreePattern& p, int size_cap,
                    const ExecPolicy& policy = default_policy());

// All Δ-trees (up to equivalence) with at most max_nodes nodes over the system alphabet.
void enumerate_trees(const System& sys, int max_nodes, const std::function<void(const DataTree&)>& visit);
std::vector<DataTree> symbolic_init_trees(const System& sys, const SymbolicInit& init);

struct ReachOptions {
  int size_cap = 16;
  int max_iterations = 256;
  ExecPolicy policy = default_policy();
};
Verdict reach_backward(const System& sys, const TreePattern& p, const ReachOptions& opts = {});

struct TerminateOptions {
  std::size_t max_states = 200000;
  ExecPolicy policy = default_policy();
};
Verdict terminate(const System& sys, const DataTree& t0, const TerminateOptions& opts = {});
// Replays the lasso and checks the domination.
bool verify_lasso(const System& sys, const Verdict& v);

struct BmcOptions {
  std::size_t max_states = 2000000;
  ExecPolicy policy = default_policy();
};
Verdict bmc(const System& sys, const TreePattern& p, const InitSpec& init, int n, const BmcOptions& opts = {});

// Checks every step replays and (if given) the target matches the last tree.
bool verify_trace(const System& sys, const Trace& tr, const TreePattern* target = nullptr);

struct SimPolicy {
  enum class Kind : std::uint8_t { First, Random, List } kind = Kind::First;
  std::uint64_t seed = 0;
};
struct Simulation {
  Trace trace;
  std::string note;
  // For List: the enabled witnesses at each visited state.
  std::vector<std::vector<StepWitness>> listings;
};
Simulation simulate(const System& sys, const DataTree& t0, int steps, const SimPolicy& policy);

// Time helper for statistics.
class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace dtprs
