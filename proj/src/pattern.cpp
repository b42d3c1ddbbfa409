#include "dtprs/pattern.hpp"

#include "dtprs/canon.hpp"

#include <algorithm>
#include <unordered_set>

namespace dtprs {

bool DataCond::eval(const Valuation& v) const {
  switch (op) {
    case Op::True: return true;
    case Op::Eq: return v.at(lhs) == v.at(rhs);
    case Op::Neq: return v.at(lhs) != v.at(rhs);
    case Op::And: return std::all_of(args.begin(), args.end(), [&](const auto& a) { return a.eval(v); });
    case Op::Or: return std::any_of(args.begin(), args.end(), [&](const auto& a) { return a.eval(v); });
    case Op::Not: return !args.front().eval(v);
  }
  return false;
}

void DataCond::collect_vars(std::set<std::string>& out) const {
  if (op == Op::Eq || op == Op::Neq) {
    out.insert(lhs);
    out.insert(rhs);
  }
  for (const auto& a : args) a.collect_vars(out);
}

NodeId TreePattern::add_child(NodeId parent, PatternLabel label, Edge edge) {
  if (parent < 0 || static_cast<std::size_t>(parent) >= nodes_.size())
    throw std::out_of_range("pattern add_child: bad parent id");
  const NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(Node{std::move(label), parent, edge, {}});
  nodes_[parent].children.push_back(id);
  return id;
}

std::vector<NodeId> TreePattern::subtree(NodeId n) const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack{n};
  while (!stack.empty()) {
    const NodeId c = stack.back();
    stack.pop_back();
    out.push_back(c);
    for (auto it = nodes_[c].children.rbegin(); it != nodes_[c].children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<NodeId> TreePattern::preorder() const { return nodes_.empty() ? std::vector<NodeId>{} : subtree(0); }

std::set<std::string> TreePattern::variables() const {
  std::set<std::string> out;
  for (const auto& n : nodes_)
    if (n.label.kind == PatternLabel::Kind::Variable) out.insert(n.label.name);
  return out;
}

void check_pattern(const TreePattern& p) {
  for (NodeId n = 0; n < static_cast<NodeId>(p.size()); ++n) {
    if (!p.label(n).is_tag_like() && !p.children(n).empty())
      throw UsageError("pattern: variable or data node must be a leaf");
  }
  std::set<std::string> used;
  p.cond().collect_vars(used);
  auto vars = p.variables();
  for (const auto& v : used)
    if (!vars.count(v)) throw UsageError("pattern: condition mentions unknown variable $" + v);
  if (p.self() && (*p.self() < 0 || *p.self() >= static_cast<NodeId>(p.size())))
    throw UsageError("pattern: bad self node");
}

bool PatternFormula::is_positive() const {
  if (op == Op::Not) return false;
  return std::all_of(args.begin(), args.end(), [](const auto& a) { return a.is_positive(); });
}

bool PatternFormula::has_relative() const {
  if (op == Op::Atom) return atom.is_relative();
  return std::any_of(args.begin(), args.end(), [](const auto& a) { return a.has_relative(); });
}

void PatternFormula::collect_atoms(std::vector<const TreePattern*>& out) const {
  if (op == Op::Atom) out.push_back(&atom);
  for (const auto& a : args) a.collect_atoms(out);
}

std::vector<std::vector<TreePattern>> PatternFormula::positive_dnf() const {
  switch (op) {
    case Op::True: return {{}};
    case Op::False: return {};
    case Op::Atom: return {{atom}};
    case Op::Or: {
      std::vector<std::vector<TreePattern>> out;
      for (const auto& a : args) {
        auto sub = a.positive_dnf();
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    case Op::And: {
      std::vector<std::vector<TreePattern>> acc{{}};
      for (const auto& a : args) {
        auto sub = a.positive_dnf();
        std::vector<std::vector<TreePattern>> next;
        for (const auto& l : acc)
          for (const auto& r : sub) {
            auto joined = l;
            joined.insert(joined.end(), r.begin(), r.end());
            next.push_back(std::move(joined));
          }
        acc = std::move(next);
      }
      return acc;
    }
    case Op::Not: break;
  }
  throw UsageError("positive_dnf: formula contains negation");
}

NodeId TemplateTree::add_child(NodeId parent, TemplateLabel label) {
  if (nodes_[parent].label.kind != TemplateLabel::Kind::Tag)
    throw std::invalid_argument("template: only tag nodes can have children");
  const NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(Node{std::move(label), parent, {}});
  nodes_[parent].children.push_back(id);
  return id;
}

void TemplateTree::collect_vars(std::set<std::string>& out) const {
  for (const auto& n : nodes_)
    if (n.label.kind == TemplateLabel::Kind::Variable) out.insert(n.label.name);
}

void TemplateTree::collect_queries(std::set<std::string>& out) const {
  for (const auto& n : nodes_)
    if (n.label.kind == TemplateLabel::Kind::QueryRef) out.insert(n.label.name);
}

// ---------------------------------------------------------------------------

namespace {

class Matcher {
 public:
  Matcher(const TreePattern& p, const DataTree& t, std::optional<NodeId> anchor, bool injective,
          const std::function<bool(const Matching&)>& visit)
      : p_(p), t_(t), anchor_(anchor), injective_(injective), visit_(visit), order_(p.preorder()) {
    if (p.is_relative() && !anchor) throw UsageError("relative pattern matched without an anchor");
    m_.image.assign(p.size(), kNoNode);
    used_.assign(t.size(), 0);
    on_self_path_.assign(p.size(), 0);
    if (p.is_relative() && anchor) {
      for (NodeId n = *p.self(); n != kNoNode; n = p.parent(n)) on_self_path_[n] = 1;
      if (*anchor < 0 || *anchor >= static_cast<NodeId>(t.size())) throw UsageError("anchor out of range");
    }
  }

  void run() {
    if (p_.empty() || t_.empty()) return;
    extend(0);
  }

 private:
  bool label_ok(NodeId pn, NodeId tn) {
    const auto& pl = p_.label(pn);
    const auto& tl = t_.label(tn);
    switch (pl.kind) {
      case PatternLabel::Kind::Tag: return tl.is_tag() && tl.tag == pl.name;
      case PatternLabel::Kind::Wildcard: return tl.is_tag();
      case PatternLabel::Kind::Data: return tl.is_data() && tl.value == pl.value;
      case PatternLabel::Kind::Variable: {
        if (!tl.is_data()) return false;
        auto it = m_.valuation.find(pl.name);
        return it == m_.valuation.end() || it->second == tl.value;
      }
    }
    return false;
  }

  bool placement_ok(NodeId pn, NodeId tn) {
    if (injective_ && used_[tn]) return false;
    if (on_self_path_[pn]) {
      if (pn == *p_.self()) {
        if (tn != *anchor_) return false;
      } else if (tn != *anchor_ && !t_.is_proper_ancestor(tn, *anchor_)) {
        return false;
      }
    }
    return label_ok(pn, tn);
  }

  // Returns false when the visitor asked to stop.
  bool extend(std::size_t i) {
    if (i == order_.size()) {
      if (!p_.cond().eval(m_.valuation)) return true;
      return visit_(m_);
    }
    const NodeId pn = order_[i];
    std::vector<NodeId> cands;
    if (pn == p_.root()) {
      cands.push_back(t_.root());
    } else {
      const NodeId img = m_.image[p_.parent(pn)];
      if (p_.edge(pn) == Edge::Child) {
        auto ch = t_.children(img);
        cands.assign(ch.begin(), ch.end());
      } else {
        cands = t_.descendants(img);
      }
      std::sort(cands.begin(), cands.end());
    }
    for (NodeId tn : cands) {
      if (!placement_ok(pn, tn)) continue;
      const auto& pl = p_.label(pn);
      bool bound_here = false;
      if (pl.kind == PatternLabel::Kind::Variable && !m_.valuation.count(pl.name)) {
        m_.valuation[pl.name] = t_.label(tn).value;
        bound_here = true;
      }
      m_.image[pn] = tn;
      used_[tn] += 1;
      const bool go_on = extend(i + 1);
      used_[tn] -= 1;
      m_.image[pn] = kNoNode;
      if (bound_here) m_.valuation.erase(pl.name);
      if (!go_on) return false;
    }
    return true;
  }

  const TreePattern& p_;
  const DataTree& t_;
  std::optional<NodeId> anchor_;
  bool injective_;
  const std::function<bool(const Matching&)>& visit_;
  std::vector<NodeId> order_;
  std::vector<int> used_;
  std::vector<char> on_self_path_;
  Matching m_;
};

}  // namespace

void for_each_matching(const TreePattern& p, const DataTree& t, std::optional<NodeId> anchor, bool injective,
                       const std::function<bool(const Matching&)>& visit) {
  // Non-relative patterns ignore the anchor.
  Matcher(p, t, p.is_relative() ? anchor : std::nullopt, injective, visit).run();
}

std::vector<Matching> match_all(const TreePattern& p, const DataTree& t, std::optional<NodeId> anchor) {
  std::vector<Matching> out;
  for_each_matching(p, t, anchor, false, [&](const Matching& m) {
    out.push_back(m);
    return true;
  });
  return out;
}

std::vector<Matching> match_injective(const TreePattern& p, const DataTree& t, std::optional<NodeId> anchor) {
  std::vector<Matching> out;
  for_each_matching(p, t, anchor, true, [&](const Matching& m) {
    out.push_back(m);
    return true;
  });
  return out;
}

bool matches_any(const TreePattern& p, const DataTree& t, std::optional<NodeId> anchor) {
  bool found = false;
  for_each_matching(p, t, anchor, false, [&](const Matching&) {
    found = true;
    return false;
  });
  return found;
}

bool eval_formula(const PatternFormula& f, const DataTree& t, std::optional<NodeId> anchor) {
  switch (f.op) {
    case PatternFormula::Op::True: return true;
    case PatternFormula::Op::False: return false;
    case PatternFormula::Op::Atom: return matches_any(f.atom, t, anchor);
    case PatternFormula::Op::And:
      return std::all_of(f.args.begin(), f.args.end(), [&](const auto& a) { return eval_formula(a, t, anchor); });
    case PatternFormula::Op::Or:
      return std::any_of(f.args.begin(), f.args.end(), [&](const auto& a) { return eval_formula(a, t, anchor); });
    case PatternFormula::Op::Not: return !eval_formula(f.args.front(), t, anchor);
  }
  return false;
}

namespace {

void instantiate_into(const TemplateTree& tpl, NodeId n, const Valuation& v,
                      const std::map<std::string, std::vector<DataTree>>& results, DataTree& out, NodeId parent) {
  const auto& l = tpl.label(n);
  switch (l.kind) {
    case TemplateLabel::Kind::Tag: {
      const NodeId id = out.add_tag(parent, l.name);
      for (NodeId c : tpl.children(n)) instantiate_into(tpl, c, v, results, out, id);
      break;
    }
    case TemplateLabel::Kind::Data: out.add_data(parent, l.value); break;
    case TemplateLabel::Kind::Variable: {
      auto it = v.find(l.name);
      if (it == v.end()) throw UsageError("template variable $" + l.name + " has no value");
      out.add_data(parent, it->second);
      break;
    }
    case TemplateLabel::Kind::QueryRef: {
      auto it = results.find(l.name);
      if (it == results.end()) break;
      for (const auto& tr : it->second) out.graft(parent, tr);
      break;
    }
  }
}

}  // namespace

std::vector<DataTree> instantiate(const TemplateTree& tpl, const Valuation& v,
                                  const std::map<std::string, std::vector<DataTree>>& results) {
  const auto& root = tpl.label(tpl.root());
  switch (root.kind) {
    case TemplateLabel::Kind::Tag: {
      DataTree out = DataTree::with_root_tag(root.name);
      for (NodeId c : tpl.children(tpl.root())) instantiate_into(tpl, c, v, results, out, out.root());
      return {std::move(out)};
    }
    case TemplateLabel::Kind::Data: return {DataTree(Label::make_data(root.value))};
    case TemplateLabel::Kind::Variable: {
      auto it = v.find(root.name);
      if (it == v.end()) throw UsageError("template variable $" + root.name + " has no value");
      return {DataTree(Label::make_data(it->second))};
    }
    case TemplateLabel::Kind::QueryRef: {
      auto it = results.find(root.name);
      return it == results.end() ? std::vector<DataTree>{} : it->second;
    }
  }
  return {};
}

std::vector<DataTree> eval_query(const Query& q, const DataTree& t, NodeId anchor) {
  std::vector<DataTree> out;
  std::unordered_set<std::string> seen;
  for_each_matching(q.body, t, anchor, false, [&](const Matching& m) {
    for (auto& tr : instantiate(q.head, m.valuation))
      if (seen.insert(raw_key(tr)).second) out.push_back(std::move(tr));
    return true;
  });
  return out;
}

}  // namespace dtprs
