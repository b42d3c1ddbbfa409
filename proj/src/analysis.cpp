#include "dtprs/analysis.hpp"
#include "dtprs/canon.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>
#include <unordered_set>

namespace dtprs {

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Reachable: return "REACHABLE";
    case Outcome::Unreachable: return "UNREACHABLE";
    case Outcome::Terminates: return "TERMINATES";
    case Outcome::Nonterminating: return "NONTERMINATING";
    case Outcome::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

int exit_code(const Verdict& v) {
  switch (v.outcome) {
    case Outcome::Unreachable:
    case Outcome::Terminates: return 0;
    case Outcome::Reachable:
    case Outcome::Nonterminating: return 1;
    case Outcome::Inconclusive: return 2;
  }
  return 2;
}

// ---------------------------------------------------------------------------

ValidationReport validate(const System& sys) {
  ValidationReport r;
  r.system = sys.name;
  r.dtd_cycle = sys.dtd.dependency_cycle();
  r.dtd_non_recursive = r.dtd_cycle.empty();
  if (r.dtd_non_recursive) {
    r.derived_depth = dtd_depth_bound(sys.dtd);
    if (*r.derived_depth > sys.depth_bound)
      r.notes.push_back("DTD admits depth " + std::to_string(*r.derived_depth) + ", declared bound " +
                        std::to_string(sys.depth_bound) + " is enforced by the invariant");
  } else {
    std::string c;
    for (const auto& a : r.dtd_cycle) c += (c.empty() ? "" : " -> ") + a;
    r.violations.push_back("DTD is recursive: " + c);
  }
  r.dtd_positive = sys.dtd.is_positive();
  r.invariant_positive = sys.invariant.is_positive();
  r.guards_positive = std::all_of(sys.rules.begin(), sys.rules.end(), [](const Rule& x) { return x.guard.is_positive(); });
  r.has_path_bound = sys.path_bound.has_value();
  if (sys.invariant.has_relative()) r.violations.push_back("invariant contains a pattern with a self node");
  for (const auto& rule : sys.rules) {
    try {
      check_rule(rule);
    } catch (const std::exception& e) {
      r.violations.push_back(e.what());
    }
  }
  for (std::size_t i = 0; i < sys.init.trees.size(); ++i) {
    if (!satisfies_invariant(sys, sys.init.trees[i])) {
      r.init_ok = false;
      r.violations.push_back("initial tree " + std::to_string(i) + " violates the static invariant");
    }
    if (sys.path_bound && longest_simple_path(graph_of(sys.init.trees[i])) > *sys.path_bound) {
      r.init_ok = false;
      r.violations.push_back("initial tree " + std::to_string(i) + " exceeds the simple-path bound");
    }
  }
  if (!r.dtd_positive) r.notes.push_back("DTD uses negation");
  if (!r.guards_positive) r.notes.push_back("some guard uses negation");
  if (!r.invariant_positive) r.notes.push_back("invariant uses negation");
  if (!r.has_path_bound) r.notes.push_back("no simple-path bound declared");
  r.positive_eligible = r.dtd_non_recursive && r.dtd_positive && r.guards_positive && r.invariant_positive &&
                        r.has_path_bound && r.violations.empty();
  if (!r.positive_eligible) r.notes.push_back("backward analysis unavailable, use bmc");
  return r;
}

std::string format_report(const ValidationReport& r) {
  std::ostringstream os;
  auto yes = [](bool b) { return b ? "yes" : "no"; };
  os << "system: " << r.system << "\n";
  os << "dtd non-recursive: " << yes(r.dtd_non_recursive) << "\n";
  if (r.derived_depth) os << "dtd depth: " << *r.derived_depth << "\n";
  os << "dtd positive: " << yes(r.dtd_positive) << "\n";
  os << "guards positive: " << yes(r.guards_positive) << "\n";
  os << "invariant positive: " << yes(r.invariant_positive) << "\n";
  os << "simple-path bound: " << yes(r.has_path_bound) << "\n";
  os << "initial trees valid: " << yes(r.init_ok) << "\n";
  os << "positive-eligible: " << yes(r.positive_eligible) << "\n";
  for (const auto& n : r.notes) os << "note: " << n << "\n";
  for (const auto& v : r.violations) os << "error: " << v << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------

std::vector<DataTree> minimize(const std::vector<DataTree>& trees, const ExecPolicy& policy) {
  const std::size_t n = trees.size();
  std::vector<char> dominated(n, 0);
  parallel_for(n, policy, [&](std::size_t i) {
    for (std::size_t j = 0; j < n && !dominated[i]; ++j) {
      if (j == i) continue;
      const bool before = trees[j].size() < trees[i].size() || (trees[j].size() == trees[i].size() && j < i);
      if (before && embeds(trees[j], trees[i])) dominated[i] = 1;
    }
  });
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i)
    if (!dominated[i]) keep.push_back(i);
  std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) { return trees[a].size() < trees[b].size(); });
  std::vector<DataTree> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(trees[i]);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Shape {
  std::string tag;  // empty for a data leaf
  std::vector<int> kids;
  int size = 1;
  int height = 0;
};

void build_shape(const std::vector<Shape>& shapes, int id, DataTree& t, NodeId parent, std::vector<NodeId>& leaves) {
  const Shape& s = shapes[id];
  NodeId n;
  if (parent == kNoNode) {
    t = DataTree::with_root_tag(s.tag);
    n = t.root();
  } else if (s.tag.empty()) {
    leaves.push_back(t.add_data(parent, 0));
    return;
  } else {
    n = t.add_tag(parent, s.tag);
  }
  for (int k : s.kids) build_shape(shapes, k, t, n, leaves);
}

}  // namespace

void enumerate_trees(const System& sys, int max_nodes, const std::function<void(const DataTree&)>& visit) {
  if (max_nodes < 1) return;
  const int B = sys.depth_bound > 0 ? sys.depth_bound : max_nodes;
  std::vector<Shape> shapes;
  shapes.push_back(Shape{"", {}, 1, 0});
  std::vector<std::string> tags = sys.alphabet;
  for (int n = 1; n <= max_nodes; ++n) {
    const int known = static_cast<int>(shapes.size());
    std::vector<Shape> fresh;
    std::vector<int> cur;
    std::function<void(int, int)> forests = [&](int remaining, int max_id) {
      if (remaining == 0) {
        int h = 0;
        for (int k : cur) h = std::max(h, shapes[k].height + 1);
        if (h > B) return;
        for (const auto& tag : tags) fresh.push_back(Shape{tag, cur, n, h});
        return;
      }
      for (int id = max_id; id >= 0; --id) {
        if (shapes[id].size > remaining) continue;
        cur.push_back(id);
        forests(remaining - shapes[id].size, id);
        cur.pop_back();
      }
    };
    forests(n - 1, known - 1);
    for (auto& s : fresh) shapes.push_back(std::move(s));
  }
  for (int id = 1; id < static_cast<int>(shapes.size()); ++id) {
    const Shape& s = shapes[id];
    if (!sys.dtd.root_labels.empty() && !sys.dtd.root_labels.count(s.tag)) continue;
    DataTree t;
    std::vector<NodeId> leaves;
    build_shape(shapes, id, t, kNoNode, leaves);
    std::unordered_set<std::string> seen;
    std::vector<DataValue> rgs(leaves.size(), 0);
    std::function<void(std::size_t, DataValue)> part = [&](std::size_t i, DataValue blocks) {
      if (i == leaves.size()) {
        DataTree u = t;
        for (std::size_t j = 0; j < leaves.size(); ++j) u.set_value(leaves[j], rgs[j]);
        if (!satisfies_invariant(sys, u)) return;
        if (seen.insert(canonical_print(u)).second) visit(u);
        return;
      }
      for (DataValue b = 0; b <= blocks; ++b) {
        rgs[i] = b;
        part(i + 1, b == blocks ? blocks + 1 : blocks);
      }
    };
    part(0, 0);
  }
}

std::vector<DataTree> symbolic_init_trees(const System& sys, const SymbolicInit& init) {
  if (init.cap <= 0) throw UsageError("symbolic initial trees need a positive enumeration cap");
  std::vector<DataTree> out;
  enumerate_trees(sys, init.cap, [&](const DataTree& t) {
    if (eval_formula(init.formula, t)) out.push_back(t);
  });
  return out;
}

namespace {

std::vector<DataTree> initial_trees(const System& sys, const InitSpec& init) {
  if (init.symbolic) return symbolic_init_trees(sys, *init.symbolic);
  return init.trees;
}

std::vector<StepWitness> all_enabled(const System& sys, const DataTree& t, const ExecPolicy& policy) {
  std::vector<StepWitness> out;
  for (const auto& r : sys.rules) {
    auto ws = enabled(sys, r, t, policy);
    for (auto& w : ws) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

bool verify_trace(const System& sys, const Trace& tr, const TreePattern* target) {
  for (std::size_t i = 0; i < tr.steps.size(); ++i)
    if (!replay(sys, tr.state(i), tr.steps[i])) return false;
  return !target || matches_any(*target, tr.last());
}

// ---------------------------------------------------------------------------

Verdict reach_backward(const System& sys, const TreePattern& p, const ReachOptions& opts) {
  Stopwatch sw;
  if (!sys.path_bound) throw UsageError("backward reachability needs a simple-path bound; use bmc");
  if (!sys.dtd.is_non_recursive()) throw UsageError("backward reachability needs a non-recursive DTD");
  const auto inits = initial_trees(sys, sys.init);

  struct Elem {
    DataTree tree;
    int level;
  };
  std::vector<Elem> history;
  std::vector<std::size_t> antichain;
  bool capped = false;
  Verdict v;

  auto level_of = [&](const DataTree& t) {
    int best = -1;
    for (const auto& e : history)
      if ((best < 0 || e.level < best) && embeds(e.tree, t)) best = e.level;
    return best;
  };

  // Walks down the levels from an initial tree, one enabled step at a time.
  auto descend = [&](const DataTree& t0) {
    Trace tr;
    tr.start = t0;
    int lvl = level_of(t0);
    while (lvl > 0) {
      const DataTree cur = tr.last();
      auto ws = all_enabled(sys, cur, opts.policy);
      std::vector<int> lv(ws.size(), -1);
      parallel_for(ws.size(), opts.policy, [&](std::size_t i) { lv[i] = level_of(ws[i].result); });
      std::size_t pick = ws.size();
      for (std::size_t i = 0; i < ws.size(); ++i)
        if (lv[i] >= 0 && lv[i] < lvl && (pick == ws.size() || lv[i] < lv[pick])) pick = i;
      if (pick == ws.size()) return std::optional<Trace>{};
      lvl = lv[pick];
      tr.steps.push_back(std::move(ws[pick]));
    }
    return std::optional<Trace>{std::move(tr)};
  };

  auto hit = [&](std::size_t e) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < inits.size(); ++i)
      if (embeds(history[e].tree, inits[i])) return i;
    return std::nullopt;
  };

  auto reachable = [&](std::size_t init_index) {
    v.outcome = Outcome::Reachable;
    auto tr = descend(inits[init_index]);
    if (tr && verify_trace(sys, *tr, &p)) {
      v.trace = std::move(*tr);
    } else {
      v.trace.start = inits[init_index];
      v.reason = "witness trace could not be rebuilt";
    }
  };

  auto insert = [&](DataTree t, int level, std::vector<std::size_t>* frontier) -> std::optional<std::size_t> {
    for (std::size_t a : antichain)
      if (embeds(history[a].tree, t)) return std::nullopt;
    history.push_back({std::move(t), level});
    const std::size_t id = history.size() - 1;
    std::erase_if(antichain, [&](std::size_t a) { return embeds(history[id].tree, history[a].tree); });
    if (frontier) std::erase_if(*frontier, [&](std::size_t a) { return std::find(antichain.begin(), antichain.end(), a) == antichain.end(); });
    antichain.push_back(id);
    if (frontier) frontier->push_back(id);
    return id;
  };

  auto finish = [&]() {
    v.stats.seconds = sw.seconds();
    v.stats.states = history.size();
    return v;
  };

  Basis b0 = pattern_basis(sys, p, opts.size_cap, opts.policy);
  capped = b0.capped;
  std::vector<std::size_t> frontier;
  for (auto& t : b0.trees) insert(std::move(t), 0, &frontier);
  v.stats.max_basis = antichain.size();
  for (std::size_t e : antichain)
    if (auto i = hit(e)) {
      reachable(*i);
      return finish();
    }

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    v.stats.iterations = static_cast<std::size_t>(iter);
    std::vector<Basis> preds(frontier.size());
    parallel_for(frontier.size(), opts.policy, [&](std::size_t i) {
      preds[i] = pred_basis(sys, history[frontier[i]].tree, opts.size_cap, ExecPolicy::serial());
    });
    std::vector<std::size_t> next;
    for (auto& pb : preds) {
      capped = capped || pb.capped;
      for (auto& t : pb.trees) {
        auto id = insert(std::move(t), iter, &next);
        if (!id) continue;
        if (auto i = hit(*id)) {
          reachable(*i);
          return finish();
        }
      }
    }
    v.stats.max_basis = std::max(v.stats.max_basis, antichain.size());
    if (next.empty()) {
      v.outcome = capped ? Outcome::Inconclusive : Outcome::Unreachable;
      if (capped) v.reason = "size cap " + std::to_string(opts.size_cap) + " cut some predecessors";
      return finish();
    }
    frontier = std::move(next);
  }
  v.outcome = Outcome::Inconclusive;
  v.reason = "no fixpoint within " + std::to_string(opts.max_iterations) + " iterations";
  return finish();
}

// ---------------------------------------------------------------------------

Verdict terminate(const System& sys, const DataTree& t0, const TerminateOptions& opts) {
  Stopwatch sw;
  Verdict v;
  struct Frame {
    DataTree tree;
    std::vector<StepWitness> succs;
    std::size_t next = 0;
  };
  SuccOptions so;
  so.policy = opts.policy;
  std::vector<Frame> path;
  std::vector<StepWitness> via;  // via[i] leads from path[i] to path[i+1]
  StateSet done;
  path.push_back({t0, succ(sys, t0, so), 0});
  std::size_t states = 1;
  while (!path.empty()) {
    Frame& top = path.back();
    if (top.next == top.succs.size()) {
      done.insert(top.tree);
      path.pop_back();
      if (!via.empty()) via.pop_back();
      continue;
    }
    StepWitness w = top.succs[top.next++];
    if (done.find(w.result)) continue;
    std::vector<std::optional<Embedding>> dom(path.size());
    parallel_for(path.size(), opts.policy, [&](std::size_t i) { dom[i] = embeds(path[i].tree, w.result); });
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (!dom[i]) continue;
      v.outcome = Outcome::Nonterminating;
      v.trace.start = t0;
      for (auto& s : via) v.trace.steps.push_back(s);
      v.trace.steps.push_back(std::move(w));
      v.lasso_start = i;
      v.lasso_embedding = std::move(*dom[i]);
      v.stats.states = states;
      v.stats.seconds = sw.seconds();
      return v;
    }
    if (++states > opts.max_states) {
      v.outcome = Outcome::Inconclusive;
      v.reason = "state limit " + std::to_string(opts.max_states) + " reached";
      v.stats.states = states;
      v.stats.seconds = sw.seconds();
      return v;
    }
    auto next = succ(sys, w.result, so);
    DataTree tree = w.result;
    via.push_back(std::move(w));
    path.push_back({std::move(tree), std::move(next), 0});
  }
  v.outcome = Outcome::Terminates;
  v.stats.states = states;
  v.stats.seconds = sw.seconds();
  return v;
}

bool verify_lasso(const System& sys, const Verdict& v) {
  if (v.outcome != Outcome::Nonterminating) return false;
  if (v.lasso_start >= v.trace.steps.size()) return false;
  if (!verify_trace(sys, v.trace)) return false;
  return is_embedding(v.trace.state(v.lasso_start), v.trace.last(), v.lasso_embedding);
}

// ---------------------------------------------------------------------------

Verdict bmc(const System& sys, const TreePattern& p, const InitSpec& init, int n, const BmcOptions& opts) {
  Stopwatch sw;
  Verdict v;
  struct Node {
    int parent;
    std::optional<StepWitness> via;
  };
  StateSet seen;
  std::vector<Node> nodes;
  std::vector<std::size_t> layer;

  auto trace_to = [&](std::size_t id) {
    std::vector<std::size_t> chain;
    for (int c = static_cast<int>(id); c >= 0; c = nodes[c].parent) chain.push_back(static_cast<std::size_t>(c));
    std::reverse(chain.begin(), chain.end());
    Trace tr;
    tr.start = seen.at(chain.front());
    for (std::size_t i = 1; i < chain.size(); ++i) tr.steps.push_back(*nodes[chain[i]].via);
    return tr;
  };
  auto done = [&](Outcome o) {
    v.outcome = o;
    v.stats.states = seen.size();
    v.stats.seconds = sw.seconds();
    return v;
  };

  for (const auto& t : initial_trees(sys, init)) {
    if (!seen.insert(t).second) continue;
    nodes.push_back({-1, std::nullopt});
    layer.push_back(seen.size() - 1);
  }
  for (std::size_t id : layer)
    if (matches_any(p, seen.at(id))) {
      v.trace = trace_to(id);
      return done(Outcome::Reachable);
    }

  SuccOptions inner;
  inner.policy = ExecPolicy::serial();
  for (int depth = 1; depth <= n; ++depth) {
    v.stats.iterations = static_cast<std::size_t>(depth);
    std::vector<std::vector<StepWitness>> out(layer.size());
    parallel_for(layer.size(), opts.policy, [&](std::size_t i) { out[i] = succ(sys, seen.at(layer[i]), inner); });
    std::vector<std::pair<std::size_t, StepWitness*>> flat;
    for (std::size_t i = 0; i < out.size(); ++i)
      for (auto& w : out[i]) flat.emplace_back(i, &w);
    std::vector<std::string> keys(flat.size());
    std::vector<char> match(flat.size(), 0);
    parallel_for(flat.size(), opts.policy, [&](std::size_t i) {
      keys[i] = canonical_print(flat[i].second->result);
      match[i] = matches_any(p, flat[i].second->result);
    });
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      auto [idx, inserted] = seen.insert(flat[i].second->result, keys[i]);
      if (!inserted) continue;
      nodes.push_back({static_cast<int>(layer[flat[i].first]), std::move(*flat[i].second)});
      if (match[i]) {
        v.trace = trace_to(idx);
        return done(Outcome::Reachable);
      }
      next.push_back(idx);
    }
    if (next.empty()) {
      v.reason = "state space exhausted at depth " + std::to_string(depth - 1);
      return done(Outcome::Unreachable);
    }
    if (seen.size() > opts.max_states) {
      v.reason = "state limit " + std::to_string(opts.max_states) + " reached";
      return done(Outcome::Inconclusive);
    }
    layer = std::move(next);
  }
  if (layer.empty()) return done(Outcome::Unreachable);
  v.reason = "bound " + std::to_string(n) + " reached";
  return done(Outcome::Inconclusive);
}

// ---------------------------------------------------------------------------

Simulation simulate(const System& sys, const DataTree& t0, int steps, const SimPolicy& policy) {
  Simulation sim;
  sim.trace.start = t0;
  std::mt19937_64 rng(policy.seed);
  for (int i = 0; i < steps; ++i) {
    auto ws = all_enabled(sys, sim.trace.last(), default_policy());
    if (policy.kind == SimPolicy::Kind::List) sim.listings.push_back(ws);
    if (ws.empty()) {
      sim.note = "no rule enabled after " + std::to_string(i) + " steps";
      return sim;
    }
    std::size_t pick = 0;
    if (policy.kind == SimPolicy::Kind::Random) pick = std::uniform_int_distribution<std::size_t>(0, ws.size() - 1)(rng);
    sim.trace.steps.push_back(std::move(ws[pick]));
  }
  if (policy.kind == SimPolicy::Kind::List) sim.listings.push_back(all_enabled(sys, sim.trace.last(), default_policy()));
  return sim;
}

}  // namespace dtprs
