#include "dtprs/rewrite.hpp"

#include "dtprs/canon.hpp"

#include <algorithm>
#include <optional>

namespace dtprs {

const Query* Rule::query(const std::string& n) const {
  for (const auto& [name, q] : queries)
    if (name == n) return &q;
  return nullptr;
}

const Forest* Rule::forest(const std::string& n) const {
  for (const auto& [name, f] : forests)
    if (name == n) return &f;
  return nullptr;
}

std::set<std::string> Rule::fresh_variables() const {
  std::set<std::string> vars;
  for (const auto& [_, f] : forests)
    for (const auto& tree : f) tree.collect_vars(vars);
  for (const auto& v : locator.base.variables()) vars.erase(v);
  return vars;
}

void check_rule(const Rule& r) {
  const auto& p = r.locator.base;
  check_pattern(p);
  for (NodeId d : r.locator.dels) {
    for (NodeId c : p.children(d))
      if (!r.locator.dels.count(c)) throw UsageError("rule " + r.name + ": del must cover the whole subtree");
    if (r.locator.appends.count(d) || r.locator.renames.count(d))
      throw UsageError("rule " + r.name + ": a deleted node cannot be renamed or appended to");
  }
  for (const auto& [n, forest] : r.locator.appends) {
    if (!p.label(n).is_tag_like()) throw UsageError("rule " + r.name + ": append on a non-tag node");
    if (!r.forest(forest)) throw UsageError("rule " + r.name + ": undefined forest " + forest);
  }
  for (const auto& [n, _] : r.locator.renames)
    if (!p.label(n).is_tag_like()) throw UsageError("rule " + r.name + ": rename on a non-tag node");
  for (const auto& [name, q] : r.queries) {
    check_pattern(q.body);
    std::set<std::string> head_vars;
    q.head.collect_vars(head_vars);
    if (head_vars.empty()) throw UsageError("rule " + r.name + ": query " + name + " has no head variable");
    auto body_vars = q.body.variables();
    for (const auto& v : head_vars)
      if (!body_vars.count(v))
        throw UsageError("rule " + r.name + ": head variable $" + v + " absent from the body of " + name);
  }
  for (const auto& [name, f] : r.forests)
    for (const auto& tree : f) {
      std::set<std::string> qs;
      tree.collect_queries(qs);
      for (const auto& q : qs)
        if (!r.query(q)) throw UsageError("rule " + r.name + ": forest " + name + " names unknown query " + q);
    }
}

const Rule* System::rule(const std::string& n) const {
  for (const auto& r : rules)
    if (r.name == n) return &r;
  return nullptr;
}

bool System::in_alphabet(const std::string& tag) const {
  return std::find(alphabet.begin(), alphabet.end(), tag) != alphabet.end();
}

bool satisfies_invariant(const System& sys, const DataTree& t) {
  if (!dtd_check(t, sys.dtd)) return false;
  if (sys.depth_bound > 0 && depth(t) > sys.depth_bound) return false;
  return eval_formula(sys.invariant, t);
}

Blocked check_matching(const Rule& rule, const DataTree& t, const Matching& m) {
  const auto& p = rule.locator.base;
  if (m.image.size() != p.size()) return Blocked::NotInjective;
  {
    auto img = m.image;
    std::sort(img.begin(), img.end());
    if (std::adjacent_find(img.begin(), img.end()) != img.end()) return Blocked::NotInjective;
  }
  // Variables must agree with the tree and the condition must hold.
  Valuation v;
  for (NodeId n = 0; n < static_cast<NodeId>(p.size()); ++n) {
    if (p.label(n).kind != PatternLabel::Kind::Variable) continue;
    const auto& l = t.label(m.image[n]);
    if (!l.is_data()) return Blocked::Cond;
    auto [it, fresh] = v.emplace(p.label(n).name, l.value);
    if (!fresh && it->second != l.value) return Blocked::Cond;
  }
  if (!p.cond().eval(v)) return Blocked::Cond;
  std::vector<char> gone(t.size(), 0);
  for (NodeId d : rule.locator.dels) {
    const NodeId x = m.image[d];
    if (x == t.root()) return Blocked::RootDeleted;
    gone[x] = 1;
    for (NodeId y : t.descendants(x)) gone[y] = 1;
  }
  for (NodeId n = 0; n < static_cast<NodeId>(p.size()); ++n)
    if (!rule.locator.dels.count(n) && gone[m.image[n]]) return Blocked::InsideDeleted;
  return Blocked::None;
}

StepWitness apply_step(const Rule& rule, const DataTree& t, const Matching& m) {
  switch (check_matching(rule, t, m)) {
    case Blocked::None: break;
    case Blocked::Cond: throw PreconditionError("apply " + rule.name + ": data condition not satisfied");
    case Blocked::NotInjective: throw PreconditionError("apply " + rule.name + ": matching is not injective");
    case Blocked::RootDeleted: throw PreconditionError("apply " + rule.name + ": matching deletes the root");
    case Blocked::InsideDeleted:
      throw PreconditionError("apply " + rule.name + ": a kept locator node lies inside a deleted subtree");
  }
  const auto& loc = rule.locator;
  StepWitness w;
  w.rule = rule.name;
  w.matching = m;
  w.valuation = m.valuation;

  // Fresh values: smallest naturals unused in t, by variable name.
  {
    auto used = t.data_values();
    DataValue next = 0;
    for (const auto& var : rule.fresh_variables()) {
      while (std::binary_search(used.begin(), used.end(), next)) ++next;
      w.valuation[var] = next++;
    }
  }

  const NodeId anchor = m.image[loc.self()];
  std::map<std::string, std::vector<DataTree>> results;
  for (const auto& [name, q] : rule.queries) results[name] = eval_query(q, t, anchor);

  std::vector<char> keep(t.size(), 1);
  for (NodeId d : loc.dels) {
    keep[m.image[d]] = 0;
    for (NodeId y : t.descendants(m.image[d])) keep[y] = 0;
  }
  std::vector<NodeId> remap;
  DataTree out = t.filtered(keep, &remap);
  for (const auto& [n, tag] : loc.renames) out.set_tag(remap[m.image[n]], tag);

  std::map<std::string, std::vector<DataTree>> built;
  for (const auto& [n, forest_name] : loc.appends) {
    auto it = built.find(forest_name);
    if (it == built.end()) {
      std::vector<DataTree> trees;
      for (const auto& tpl : *rule.forest(forest_name)) {
        auto inst = instantiate(tpl, w.valuation, results);
        for (auto& tr : inst) trees.push_back(std::move(tr));
      }
      it = built.emplace(forest_name, std::move(trees)).first;
    }
    for (const auto& tr : it->second) out.graft(remap[m.image[n]], tr);
  }
  w.result = std::move(out);
  return w;
}

DataTree apply(const Rule& rule, const DataTree& t, const Matching& m) { return apply_step(rule, t, m).result; }

std::vector<StepWitness> enabled(const System& sys, const Rule& rule, const DataTree& t, const ExecPolicy& policy) {
  TreePattern free = rule.locator.base;
  free.set_self(std::nullopt);
  std::vector<Matching> ms;
  for_each_matching(free, t, std::nullopt, true, [&](const Matching& m) {
    ms.push_back(m);
    return true;
  });
  std::vector<std::optional<StepWitness>> slots(ms.size());
  parallel_for(ms.size(), policy, [&](std::size_t i) {
    if (check_matching(rule, t, ms[i]) != Blocked::None) return;
    if (!rule.guard.is_true() && !eval_formula(rule.guard, t, ms[i].image[rule.locator.self()])) return;
    StepWitness w = apply_step(rule, t, ms[i]);
    if (!satisfies_invariant(sys, w.result)) return;
    slots[i] = std::move(w);
  });
  std::vector<StepWitness> out;
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  return out;
}

void check_path_bound(const System& sys, const DataTree& t) {
  if (!sys.path_bound) return;
  const int len = longest_simple_path(graph_of(t), ExecPolicy::serial());
  if (len > *sys.path_bound)
    throw PathBoundViolation("simple path of length " + std::to_string(len) + " exceeds K=" +
                                 std::to_string(*sys.path_bound) + " in " + canonical_print(t),
                             t, len);
}

std::vector<StepWitness> succ(const System& sys, const DataTree& t, const SuccOptions& opts) {
  std::vector<StepWitness> all;
  for (const auto& r : sys.rules) {
    auto ws = enabled(sys, r, t, opts.policy);
    for (auto& w : ws) all.push_back(std::move(w));
  }
  std::vector<std::string> keys(all.size());
  parallel_for(all.size(), opts.policy, [&](std::size_t i) { keys[i] = canonical_print(all[i].result); });
  StateSet seen;
  std::vector<StepWitness> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (seen.insert(all[i].result, keys[i]).second) out.push_back(std::move(all[i]));
  if (opts.check_path_bound && sys.path_bound) {
    std::vector<int> lengths(out.size(), 0);
    parallel_for(out.size(), opts.policy,
                 [&](std::size_t i) { lengths[i] = longest_simple_path(graph_of(out[i].result), ExecPolicy::serial()); });
    for (std::size_t i = 0; i < out.size(); ++i)
      if (lengths[i] > *sys.path_bound)
        throw PathBoundViolation("simple path of length " + std::to_string(lengths[i]) + " exceeds K=" +
                                     std::to_string(*sys.path_bound) + " after rule " + out[i].rule,
                                 out[i].result, lengths[i]);
  }
  return out;
}

bool replay(const System& sys, const DataTree& from, const StepWitness& w) {
  const Rule* r = sys.rule(w.rule);
  if (!r) return false;
  try {
    if (check_matching(*r, from, w.matching) != Blocked::None) return false;
    if (!r->guard.is_true() && !eval_formula(r->guard, from, w.matching.image[r->locator.self()])) return false;
    StepWitness again = apply_step(*r, from, w.matching);
    return again.result == w.result && again.valuation == w.valuation && satisfies_invariant(sys, again.result);
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace dtprs
