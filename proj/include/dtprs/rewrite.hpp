#pragma once

#include "dtprs/parallel.hpp"
#include "dtprs/pattern.hpp"
#include "dtprs/tree.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dtprs {

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class AlphabetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised by the simple-path monitor; carries the offending tree.
class PathBoundViolation : public BoundViolation {
 public:
  PathBoundViolation(const std::string& what, DataTree tree, int length)
      : BoundViolation(what), tree_(std::move(tree)), length_(length) {}
  const DataTree& tree() const { return tree_; }
  int length() const { return length_; }

 private:
  DataTree tree_;
  int length_;
};

struct Locator {
  TreePattern base;
  std::map<NodeId, std::string> appends;  // node -> forest name
  std::map<NodeId, std::string> renames;  // node -> new tag
  std::set<NodeId> dels;

  // Pattern node the rule is anchored at: the marked self, or the root.
  NodeId self() const { return base.self().value_or(base.root()); }
  friend bool operator==(const Locator&, const Locator&) = default;
};

struct Rule {
  std::string name;
  Locator locator;
  PatternFormula guard;
  std::vector<std::pair<std::string, Query>> queries;
  std::vector<std::pair<std::string, Forest>> forests;

  const Query* query(const std::string& n) const;
  const Forest* forest(const std::string& n) const;
  // Forest variables not bound by the locator; they receive fresh values.
  std::set<std::string> fresh_variables() const;

  friend bool operator==(const Rule&, const Rule&) = default;
};

// Throws UsageError when the locator/forest structure is malformed.
void check_rule(const Rule& r);

struct SymbolicInit {
  PatternFormula formula;
  int cap = 0;
  friend bool operator==(const SymbolicInit&, const SymbolicInit&) = default;
};

struct InitSpec {
  std::vector<DataTree> trees;
  std::optional<SymbolicInit> symbolic;
  friend bool operator==(const InitSpec&, const InitSpec&) = default;
};

struct System {
  std::string name;
  std::vector<std::string> alphabet;
  Dtd dtd;
  PatternFormula invariant;
  int depth_bound = 0;
  std::optional<int> path_bound;  // K; absent means unbounded (forward use only)
  InitSpec init;
  std::vector<Rule> rules;

  const Rule* rule(const std::string& n) const;
  bool in_alphabet(const std::string& tag) const;
  friend bool operator==(const System&, const System&) = default;
};

// The static invariant: DTD, declared depth bound, data invariant.
bool satisfies_invariant(const System& sys, const DataTree& t);

struct StepWitness {
  std::string rule;
  Matching matching;
  Valuation valuation;  // locator variables plus fresh ones
  DataTree result;
};

// Why a matching does not yield a step (empty when it does).
enum class Blocked : std::uint8_t { None, Cond, NotInjective, RootDeleted, InsideDeleted };
Blocked check_matching(const Rule& rule, const DataTree& t, const Matching& m);

// One rewriting step. Throws PreconditionError when the matching is not admissible.
StepWitness apply_step(const Rule& rule, const DataTree& t, const Matching& m);
DataTree apply(const Rule& rule, const DataTree& t, const Matching& m);

std::vector<StepWitness> enabled(const System& sys, const Rule& rule, const DataTree& t,
                                 const ExecPolicy& policy = default_policy());

struct SuccOptions {
  bool check_path_bound = true;
  ExecPolicy policy = default_policy();
};

// One witness per ⪯-equivalence class of results, in rule/matching order.
std::vector<StepWitness> succ(const System& sys, const DataTree& t, const SuccOptions& opts = {});

// Re-applies a witness and checks the result is reproduced exactly.
bool replay(const System& sys, const DataTree& from, const StepWitness& w);

// Throws PathBoundViolation if the system declares K and t exceeds it.
void check_path_bound(const System& sys, const DataTree& t);

// Service call / return locators for guarded active documents.
Rule compile_gaxml_call(const std::string& f, const Query& arg_query, const PatternFormula& call_guard,
                        const std::set<std::string>& alphabet);
Rule compile_gaxml_return(const std::string& f, const Query& ret_query, const PatternFormula& ret_guard,
                          const std::set<std::string>& alphabet);

}  // namespace dtprs
