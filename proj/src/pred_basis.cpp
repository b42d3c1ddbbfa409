#include "dtprs/analysis.hpp"
#include "dtprs/canon.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

// Minimal predecessors are built by gluing: the kept part of the target, the locator image,
// guard and query witnesses, invariant witnesses and DTD completions are laid over a shared
// skeleton whose data leaves carry value groups. Every way of merging the groups is then tried
// and each concrete tree is checked with a real rewriting step.

namespace dtprs {

namespace {

struct GNode {
  bool data = false;
  std::string tag;  // pre-state tag
  int group = -1;
  int parent = -1;
  std::vector<int> kids;
  int depth = 0;
  int tnode = -1;  // target node kept by the step
  bool renamed = false;
};

struct GroupInfo {
  int target = -1;
  bool has_const = false;
  DataValue cst = 0;
};

bool compatible(const GroupInfo& a, const GroupInfo& b) {
  if (a.target >= 0 && b.target >= 0 && a.target != b.target) return false;
  if (a.has_const && b.has_const && a.cst != b.cst) return false;
  return true;
}

void absorb(GroupInfo& a, const GroupInfo& b) {
  if (b.target >= 0) a.target = b.target;
  if (b.has_const) {
    a.has_const = true;
    a.cst = b.cst;
  }
}

struct Skel {
  std::vector<GNode> nodes;
  std::vector<int> uf;
  std::vector<GroupInfo> info;
  std::vector<int> loc;     // locator node -> skeleton node
  std::vector<char> taken;  // skeleton node used by the locator

  int size() const { return static_cast<int>(nodes.size()); }
  int find(int g) const {
    while (uf[g] != g) g = uf[g];
    return g;
  }
  int new_group(GroupInfo gi = {}) {
    uf.push_back(static_cast<int>(uf.size()));
    info.push_back(gi);
    return static_cast<int>(uf.size()) - 1;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return true;
    if (!compatible(info[a], info[b])) return false;
    absorb(info[a], info[b]);
    uf[b] = a;
    return true;
  }
  bool mergeable(int a, int b) const { return compatible(info[find(a)], info[find(b)]); }
  int const_group(DataValue v) {
    for (int g = 0; g < static_cast<int>(uf.size()); ++g)
      if (uf[g] == g && info[g].has_const && info[g].cst == v) return g;
    return new_group({-1, true, v});
  }
  int add(int parent, bool data, std::string tag, int group) {
    GNode n;
    n.data = data;
    n.tag = std::move(tag);
    n.group = group;
    n.parent = parent;
    n.depth = parent < 0 ? 0 : nodes[parent].depth + 1;
    const int id = size();
    nodes.push_back(std::move(n));
    taken.push_back(0);
    if (parent >= 0) nodes[parent].kids.push_back(id);
    return id;
  }
  bool ancestor_or_self(int anc, int n) const {
    while (n >= 0) {
      if (n == anc) return true;
      n = nodes[n].parent;
    }
    return false;
  }
};

// ---------------------------------------------------------------------------
// Structural fit of a target subtree into the trees a forest template can produce.

bool fits_template(const DataTree& t, NodeId x, const Rule& r, const TemplateTree& tpl, NodeId tn, int fuel);

bool fits_kids(const DataTree& t, NodeId x, const Rule& r, const TemplateTree& tpl, NodeId tn, int fuel) {
  std::vector<NodeId> plain, refs;
  for (NodeId c : tpl.children(tn)) (tpl.label(c).kind == TemplateLabel::Kind::QueryRef ? refs : plain).push_back(c);
  std::vector<NodeId> rest;
  for (NodeId k : t.children(x)) {
    bool absorbed = false;
    for (NodeId q : refs)
      if (fits_template(t, k, r, tpl, q, fuel)) {
        absorbed = true;
        break;
      }
    if (!absorbed) rest.push_back(k);
  }
  if (rest.size() > plain.size()) return false;
  std::vector<std::vector<int>> adj(rest.size());
  for (std::size_t i = 0; i < rest.size(); ++i)
    for (std::size_t j = 0; j < plain.size(); ++j)
      if (fits_template(t, rest[i], r, tpl, plain[j], fuel)) adj[i].push_back(static_cast<int>(j));
  std::vector<int> owner(plain.size(), -1);
  std::function<bool(int, std::vector<char>&)> augment = [&](int i, std::vector<char>& seen) {
    for (int j : adj[i]) {
      if (seen[j]) continue;
      seen[j] = 1;
      if (owner[j] < 0 || augment(owner[j], seen)) {
        owner[j] = i;
        return true;
      }
    }
    return false;
  };
  for (std::size_t i = 0; i < rest.size(); ++i) {
    std::vector<char> seen(plain.size(), 0);
    if (!augment(static_cast<int>(i), seen)) return false;
  }
  return true;
}

bool fits_template(const DataTree& t, NodeId x, const Rule& r, const TemplateTree& tpl, NodeId tn, int fuel) {
  const auto& l = tpl.label(tn);
  switch (l.kind) {
    case TemplateLabel::Kind::Data:
    case TemplateLabel::Kind::Variable: return t.label(x).is_data();
    case TemplateLabel::Kind::QueryRef: {
      const Query* q = r.query(l.name);
      return q && fuel > 0 && fits_template(t, x, r, q->head, q->head.root(), fuel - 1);
    }
    case TemplateLabel::Kind::Tag:
      if (!t.label(x).is_tag() || t.label(x).tag != l.name) return false;
      return fits_kids(t, x, r, tpl, tn, fuel);
  }
  return false;
}

bool fits_forest(const DataTree& t, NodeId x, const Rule& r, const std::string& forest) {
  const Forest* f = r.forest(forest);
  if (!f) return false;
  return std::any_of(f->begin(), f->end(), [&](const TemplateTree& tpl) { return fits_template(t, x, r, tpl, tpl.root(), 4); });
}

// Tag an append node leaves on its image after the step, or empty for a wildcard without rename.
std::optional<std::string> post_tag(const Rule& r, NodeId v) {
  if (auto it = r.locator.renames.find(v); it != r.locator.renames.end()) return it->second;
  const auto& l = r.locator.base.label(v);
  if (l.kind == PatternLabel::Kind::Tag) return l.name;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Minimal child additions making a positive count formula true.

std::vector<std::vector<std::string>> deficits(const CountFormula& f, const std::map<std::string, int>& counts,
                                               int data) {
  static const std::string kDom = "\x01dom";
  std::vector<std::vector<std::string>> options;
  for (const auto& disjunct : f.positive_dnf()) {
    std::map<std::string, int> need;
    for (const auto& a : disjunct) {
      const std::string key = a.dom ? kDom : a.symbol;
      need[key] = std::max(need[key], a.at_least);
    }
    std::vector<std::string> add;
    for (const auto& [key, k] : need) {
      int have = 0;
      if (key == kDom) {
        have = data;
      } else if (auto it = counts.find(key); it != counts.end()) {
        have = it->second;
      }
      for (int i = have; i < k; ++i) add.push_back(key == kDom ? std::string() : key);
    }
    std::sort(add.begin(), add.end());
    if (add.empty()) return {{}};
    options.push_back(std::move(add));
  }
  // Drop options that add a superset of another option's children.
  std::vector<std::vector<std::string>> kept;
  for (std::size_t i = 0; i < options.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < options.size() && !dominated; ++j) {
      if (i == j) continue;
      const bool sub = std::includes(options[i].begin(), options[i].end(), options[j].begin(), options[j].end());
      if (sub && (options[i] != options[j] || j < i)) dominated = true;
    }
    if (!dominated) kept.push_back(options[i]);
  }
  return kept;
}

// 1 true, 0 false, -1 undetermined by the current groups.
int cond3(const DataCond& d, const Skel& s, const std::map<std::string, int>& vars) {
  switch (d.op) {
    case DataCond::Op::True: return 1;
    case DataCond::Op::Eq:
    case DataCond::Op::Neq: {
      const int a = s.find(vars.at(d.lhs)), b = s.find(vars.at(d.rhs));
      int eq = a == b ? 1 : (s.mergeable(a, b) ? -1 : 0);
      if (d.op == DataCond::Op::Neq && eq >= 0) eq = 1 - eq;
      return eq;
    }
    case DataCond::Op::Not: {
      const int v = cond3(d.args.front(), s, vars);
      return v < 0 ? v : 1 - v;
    }
    case DataCond::Op::And: {
      int acc = 1;
      for (const auto& a : d.args) {
        const int v = cond3(a, s, vars);
        if (v == 0) return 0;
        if (v < 0) acc = -1;
      }
      return acc;
    }
    case DataCond::Op::Or: {
      int acc = 0;
      for (const auto& a : d.args) {
        const int v = cond3(a, s, vars);
        if (v == 1) return 1;
        if (v < 0) acc = -1;
      }
      return acc;
    }
  }
  return -1;
}

struct Piece {
  const TreePattern* p = nullptr;
  const Locator* loc = nullptr;  // set while gluing the locator itself
  std::optional<int> anchor;
  std::vector<NodeId> order;
  std::vector<char> on_path;  // root-to-self path of a relative piece
};

struct PState {
  Skel s;
  std::vector<int> img;
  std::map<std::string, int> vars;
};

using SkelCont = std::function<void(Skel&)>;

class Gluer {
 public:
  Gluer(const System& sys, int cap, bool cap_is_binding)
      : sys_(sys), cap_(cap), cap_binding_(cap_is_binding), sigma_(sys.alphabet) {
    DataValue hi = 0;
    auto scan_pattern = [&](const TreePattern& p) {
      for (NodeId n = 0; n < static_cast<NodeId>(p.size()); ++n)
        if (p.label(n).kind == PatternLabel::Kind::Data) hi = std::max(hi, p.label(n).value + 1);
    };
    auto scan_formula = [&](const PatternFormula& f) {
      std::vector<const TreePattern*> atoms;
      f.collect_atoms(atoms);
      for (const auto* a : atoms) scan_pattern(*a);
    };
    auto scan_template = [&](const TemplateTree& t) {
      for (NodeId n = 0; n < static_cast<NodeId>(t.size()); ++n)
        if (t.label(n).kind == TemplateLabel::Kind::Data) hi = std::max(hi, t.label(n).value + 1);
    };
    for (const auto& r : sys.rules) {
      scan_pattern(r.locator.base);
      scan_formula(r.guard);
      for (const auto& [_, q] : r.queries) {
        scan_pattern(q.body);
        scan_template(q.head);
      }
      for (const auto& [_, f] : r.forests)
        for (const auto& tpl : f) scan_template(tpl);
    }
    scan_formula(sys.invariant);
    fresh_base_ = hi;
  }

  bool capped() const { return capped_; }
  std::vector<DataTree>& out() { return out_; }

  // Predecessors of `target` through `rule` keeping exactly the target nodes marked old.
  void pred(const Rule& rule, const DataTree& target, const std::vector<char>& old) {
    rule_ = &rule;
    target_ = &target;
    goal_ = nullptr;
    old_ = &old;
    Skel s;
    std::vector<int> skel_of(target.size(), -1);
    std::map<DataValue, int> groups;
    for (NodeId n : target.preorder()) {
      if (!old[n]) continue;
      const auto& l = target.label(n);
      const int parent = n == target.root() ? -1 : skel_of[target.parent(n)];
      int g = -1;
      if (l.is_data()) {
        auto it = groups.find(l.value);
        if (it == groups.end()) {
          GroupInfo gi;
          gi.target = static_cast<int>(groups.size());
          it = groups.emplace(l.value, s.new_group(gi)).first;
        }
        g = it->second;
      }
      skel_of[n] = s.add(parent, l.is_data(), l.is_data() ? std::string() : l.tag, g);
      s.nodes[skel_of[n]].tnode = n;
    }
    if (s.size() > cap_) {
      note_cap();
      return;
    }
    skel_of_ = skel_of;
    Piece pc = make_piece(rule.locator.base, std::nullopt);
    pc.loc = &rule.locator;
    PState st{std::move(s), std::vector<int>(rule.locator.base.size(), -1), {}};
    glue(pc, std::move(st), 0, [&](PState& done) {
      done.s.loc = done.img;
      if (!locator_ok(done.s)) return;
      after_locator(done.s);
    });
  }

  // Trees matched by `goal`.
  void pattern(const TreePattern& goal) {
    rule_ = nullptr;
    target_ = nullptr;
    goal_ = &goal;
    Skel s;
    s.add(-1, false, std::string(), -1);  // root tag chosen below
    Piece pc = make_piece(goal, std::nullopt);
    const auto& rl = goal.label(goal.root());
    std::vector<std::string> roots;
    if (rl.kind == PatternLabel::Kind::Tag) {
      roots.push_back(rl.name);
    } else if (rl.kind == PatternLabel::Kind::Wildcard) {
      roots = sigma_;
    } else {
      return;  // a data root matches no Δ-tree
    }
    for (const auto& r : roots) {
      Skel s2 = s;
      s2.nodes[0].tag = r;
      PState st{std::move(s2), std::vector<int>(goal.size(), -1), {}};
      glue(pc, std::move(st), 0, [&](PState& done) { invariant_then_complete(done.s); });
    }
  }

 private:
  void note_cap() {
    if (cap_binding_) capped_ = true;
  }

  Piece make_piece(const TreePattern& p, std::optional<int> anchor) const {
    Piece pc;
    pc.p = &p;
    pc.anchor = p.is_relative() ? anchor : std::nullopt;
    pc.order = p.preorder();
    pc.on_path.assign(p.size(), 0);
    if (pc.anchor && p.self()) {
      for (NodeId n = *p.self(); n != kNoNode; n = p.parent(n)) pc.on_path[n] = 1;
    }
    return pc;
  }

  // Binds pattern node v to existing skeleton node x; may branch on the pre-tag of a renamed node.
  void bind_existing(const Piece& pc, const PState& st, NodeId v, int x, const std::function<void(PState&)>& k) {
    const auto& p = *pc.p;
    if (pc.on_path[v]) {
      if (v == *p.self() ? x != *pc.anchor : !st.s.ancestor_or_self(x, *pc.anchor)) return;
    }
    if (pc.loc && st.s.taken[x]) return;
    const GNode& n = st.s.nodes[x];
    const auto& l = p.label(v);
    const bool loc_old = pc.loc && n.tnode >= 0;
    if (loc_old && pc.loc->dels.count(v)) return;
    auto finish = [&](PState& s2) {
      s2.img[v] = x;
      if (pc.loc) s2.s.taken[x] = 1;
      k(s2);
    };
    switch (l.kind) {
      case PatternLabel::Kind::Variable:
      case PatternLabel::Kind::Data: {
        if (!n.data) return;
        PState s2 = st;
        int g;
        if (l.kind == PatternLabel::Kind::Data) {
          g = s2.s.const_group(l.value);
        } else if (auto it = s2.vars.find(l.name); it != s2.vars.end()) {
          g = it->second;
        } else {
          s2.vars[l.name] = n.group;
          g = n.group;
        }
        if (!s2.s.unite(g, n.group)) return;
        finish(s2);
        return;
      }
      case PatternLabel::Kind::Tag:
      case PatternLabel::Kind::Wildcard: {
        if (n.data) return;
        auto ren = pc.loc ? pc.loc->renames.find(v) : std::map<NodeId, std::string>::const_iterator{};
        if (loc_old && ren != pc.loc->renames.end()) {
          // The target shows the renamed tag; the pre-state tag comes from the locator label.
          if (n.tag != ren->second) return;
          std::vector<std::string> pre = l.kind == PatternLabel::Kind::Tag ? std::vector<std::string>{l.name} : sigma_;
          for (const auto& tag : pre) {
            PState s2 = st;
            s2.s.nodes[x].tag = tag;
            s2.s.nodes[x].renamed = true;
            finish(s2);
          }
          return;
        }
        if (l.kind == PatternLabel::Kind::Tag && n.tag != l.name) return;
        PState s2 = st;
        finish(s2);
        return;
      }
    }
  }

  // New node for v as a child of q.
  void bind_new(const Piece& pc, const PState& st, NodeId v, int q, const std::function<void(PState&)>& k) {
    const auto& l = pc.p->label(v);
    auto finish = [&](PState& s2, int x) {
      s2.img[v] = x;
      if (pc.loc) s2.s.taken[x] = 1;
      k(s2);
    };
    switch (l.kind) {
      case PatternLabel::Kind::Tag: {
        PState s2 = st;
        finish(s2, s2.s.add(q, false, l.name, -1));
        return;
      }
      case PatternLabel::Kind::Wildcard:
        for (const auto& tag : sigma_) {
          PState s2 = st;
          finish(s2, s2.s.add(q, false, tag, -1));
        }
        return;
      case PatternLabel::Kind::Variable: {
        PState s2 = st;
        int g;
        if (auto it = s2.vars.find(l.name); it != s2.vars.end()) {
          g = it->second;
        } else {
          g = s2.s.new_group();
          s2.vars[l.name] = g;
        }
        finish(s2, s2.s.add(q, true, std::string(), g));
        return;
      }
      case PatternLabel::Kind::Data: {
        PState s2 = st;
        const int g = s2.s.const_group(l.value);
        finish(s2, s2.s.add(q, true, std::string(), g));
        return;
      }
    }
  }

  // Every way to give a new node a parent: p itself (child edge), or any tag node below p
  // reached through a chain of new tag nodes (descendant edge).
  void placements(const PState& st, int p, Edge e, const std::function<void(PState&, int)>& k) {
    if (st.s.nodes[p].data) return;
    const int B = sys_.depth_bound;
    auto room = [&](const PState& s, int extra) {
      if (s.s.size() + extra > cap_) {
        note_cap();
        return false;
      }
      return true;
    };
    if (e == Edge::Child) {
      if (st.s.nodes[p].depth + 1 > B || !room(st, 1)) return;
      PState s2 = st;
      k(s2, p);
      return;
    }
    std::vector<int> hosts;
    for (int x = 0; x < st.s.size(); ++x)
      if (!st.s.nodes[x].data && st.s.ancestor_or_self(p, x)) hosts.push_back(x);
    for (int q : hosts) {
      std::function<void(PState&, int, int)> chain = [&](PState& s, int at, int left) {
        if (left == 0) {
          k(s, at);
          return;
        }
        for (const auto& tag : sigma_) {
          PState s2 = s;
          const int c = s2.s.add(at, false, tag, -1);
          chain(s2, c, left - 1);
        }
      };
      for (int j = 0; st.s.nodes[q].depth + j + 1 <= B; ++j) {
        if (!room(st, j + 1)) break;
        PState s2 = st;
        chain(s2, q, j);
      }
    }
  }

  void glue(const Piece& pc, PState st, std::size_t i, const std::function<void(PState&)>& k) {
    const auto& p = *pc.p;
    if (i == pc.order.size()) {
      if (cond3(p.cond(), st.s, st.vars) == 0) return;
      k(st);
      return;
    }
    const NodeId v = pc.order[i];
    auto next = [&](PState& s2) { glue(pc, std::move(s2), i + 1, k); };
    if (v == p.root()) {
      bind_existing(pc, st, v, 0, next);
      return;
    }
    const int par = st.img[p.parent(v)];
    const Edge e = p.edge(v);
    for (int x = 0; x < st.s.size(); ++x) {
      if (x == par) continue;
      const bool ok = e == Edge::Child ? st.s.nodes[x].parent == par : st.s.ancestor_or_self(par, x);
      if (ok) bind_existing(pc, st, v, x, next);
    }
    if (pc.on_path[v]) return;
    placements(st, par, e, [&](PState& s2, int q) { bind_new(pc, s2, v, q, next); });
  }

  // Deleted subtrees may hold neither kept target nodes nor kept locator nodes; appended
  // target subtrees must hang below append images and fit their forests.
  bool locator_ok(const Skel& s) const {
    const auto& loc = rule_->locator;
    std::vector<char> gone(s.size(), 0);
    for (NodeId d : loc.dels) {
      const int x = s.loc[d];
      if (x == 0) return false;
      for (int y = 0; y < s.size(); ++y)
        if (s.ancestor_or_self(x, y)) gone[y] = 1;
    }
    for (int y = 0; y < s.size(); ++y)
      if (gone[y] && s.nodes[y].tnode >= 0) return false;
    for (NodeId n = 0; n < static_cast<NodeId>(loc.base.size()); ++n)
      if (!loc.dels.count(n) && gone[s.loc[n]]) return false;
    const DataTree& t = *target_;
    for (NodeId n = 1; n < static_cast<NodeId>(t.size()); ++n) {
      if ((*old_)[n] || !(*old_)[t.parent(n)]) continue;
      const int x = skel_of_[t.parent(n)];
      bool placed = false;
      for (const auto& [a, forest] : loc.appends)
        if (s.loc[a] == x && fits_forest(t, n, *rule_, forest)) {
          placed = true;
          break;
        }
      if (!placed) return false;
    }
    return true;
  }

  void after_locator(Skel& s) {
    const int anchor = s.loc[rule_->locator.self()];
    for (const auto& disjunct : rule_->guard.positive_dnf()) {
      Skel s2 = s;
      glue_atoms(disjunct, 0, anchor, s2, [&](Skel& s3) { queries(s3, 0, anchor); });
    }
  }

  void glue_atoms(const std::vector<TreePattern>& atoms, std::size_t i, std::optional<int> anchor, Skel& s,
                  const SkelCont& k) {
    if (i == atoms.size()) {
      k(s);
      return;
    }
    Piece pc = make_piece(atoms[i], anchor);
    PState st{s, std::vector<int>(atoms[i].size(), -1), {}};
    glue(pc, std::move(st), 0, [&](PState& done) { glue_atoms(atoms, i + 1, anchor, done.s, k); });
  }

  int query_budget(const Query& q) const {
    const DataTree& t = *target_;
    int fit = 0;
    for (NodeId n = 0; n < static_cast<NodeId>(t.size()); ++n)
      if (!(*old_)[n] && fits_template(t, n, *rule_, q.head, q.head.root(), 4)) ++fit;
    const auto& root = q.head.label(q.head.root());
    bool counts = false;
    for (const auto& [tag, f] : sys_.dtd.rules) {
      std::set<std::string> mentioned;
      f.collect_tags(mentioned);
      if (root.kind == TemplateLabel::Kind::Tag && mentioned.count(root.name)) counts = true;
      if (root.kind != TemplateLabel::Kind::Tag) {
        for (const auto& disjunct : f.positive_dnf())
          for (const auto& a : disjunct)
            if (a.dom) counts = true;
      }
    }
    return fit + (counts ? sys_.dtd.max_constant() : 0);
  }

  void queries(Skel& s, std::size_t qi, int anchor) {
    if (qi == rule_->queries.size()) {
      invariant_then_complete(s);
      return;
    }
    const Query& q = rule_->queries[qi].second;
    const int budget = query_budget(q);
    std::function<void(Skel&, int)> more = [&](Skel& cur, int left) {
      queries(cur, qi + 1, anchor);
      if (left == 0) return;
      Piece pc = make_piece(q.body, anchor);
      PState st{cur, std::vector<int>(q.body.size(), -1), {}};
      glue(pc, std::move(st), 0, [&](PState& done) { more(done.s, left - 1); });
    };
    Skel s2 = s;
    more(s2, budget);
  }

  void invariant_then_complete(Skel& s) {
    for (const auto& disjunct : sys_.invariant.positive_dnf()) {
      Skel s2 = s;
      glue_atoms(disjunct, 0, std::nullopt, s2, [&](Skel& s3) {
        if (!sys_.dtd.root_labels.empty() && !sys_.dtd.root_labels.count(s3.nodes[0].tag)) return;
        complete(s3, 0, [&](Skel& s4) { finish(s4, {}, {}, 0); });
      });
    }
  }

  // Adds children until every tag node from `from` on satisfies its DTD rule.
  void complete(Skel& s, int from, const SkelCont& k) {
    int i = from;
    for (; i < s.size(); ++i) {
      const GNode& n = s.nodes[i];
      if (n.data) continue;
      auto it = sys_.dtd.rules.find(n.tag);
      if (it == sys_.dtd.rules.end()) continue;
      std::map<std::string, int> counts;
      int data = 0;
      for (int c : n.kids) {
        if (s.nodes[c].data)
          ++data;
        else
          ++counts[s.nodes[c].tag];
      }
      auto opts = deficits(it->second, counts, data);
      if (opts.size() == 1 && opts[0].empty()) continue;
      for (const auto& add : opts) {
        if (n.depth + 1 > sys_.depth_bound) break;
        if (s.size() + static_cast<int>(add.size()) > cap_) {
          note_cap();
          continue;
        }
        Skel s2 = s;
        for (const auto& tag : add) {
          if (tag.empty())
            s2.add(i, true, std::string(), s2.new_group());
          else
            s2.add(i, false, tag, -1);
        }
        complete(s2, i + 1, k);
      }
      return;
    }
    k(s);
  }

  // Assigns every value group to a block, then checks each concrete tree.
  void finish(Skel& s, std::vector<int> block_of, std::vector<GroupInfo> blocks, int repairs) {
    std::vector<int> groups;
    {
      std::vector<char> seen(s.uf.size(), 0);
      for (const auto& n : s.nodes) {
        if (!n.data) continue;
        const int g = s.find(n.group);
        if (!seen[g]) {
          seen[g] = 1;
          if (g >= static_cast<int>(block_of.size()) || block_of[g] < 0) groups.push_back(g);
        }
      }
    }
    block_of.resize(s.uf.size(), -1);
    std::function<void(std::size_t)> assign = [&](std::size_t i) {
      if (i == groups.size()) {
        evaluate(s, block_of, blocks, repairs);
        return;
      }
      const int g = groups[i];
      const GroupInfo& gi = s.info[g];
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (!compatible(blocks[b], gi)) continue;
        const GroupInfo saved = blocks[b];
        absorb(blocks[b], gi);
        block_of[g] = static_cast<int>(b);
        assign(i + 1);
        blocks[b] = saved;
      }
      blocks.push_back(gi);
      block_of[g] = static_cast<int>(blocks.size()) - 1;
      assign(i + 1);
      blocks.pop_back();
      block_of[g] = -1;
    };
    assign(0);
  }

  DataTree concretize(const Skel& s, const std::vector<int>& block_of, const std::vector<GroupInfo>& blocks) const {
    auto value = [&](int b) {
      const auto& gi = blocks[b];
      if (gi.has_const) return gi.cst;
      return fresh_base_ + static_cast<DataValue>(b);
    };
    DataTree t(s.nodes[0].data ? Label::make_data(value(block_of[s.find(s.nodes[0].group)]))
                               : Label::make_tag(s.nodes[0].tag));
    for (int i = 1; i < s.size(); ++i) {
      const auto& n = s.nodes[i];
      t.add_child(n.parent, n.data ? Label::make_data(value(block_of[s.find(n.group)])) : Label::make_tag(n.tag));
    }
    return t;
  }

  bool beyond_k(const DataTree& t1) const {
    return sys_.path_bound && longest_simple_path(graph_of(t1), ExecPolicy::serial()) > *sys_.path_bound;
  }

  bool passes(const DataTree& t1) {
    if (!satisfies_invariant(sys_, t1)) return false;
    if (goal_) return matches_any(*goal_, t1);
    for (const auto& w : enabled(sys_, *rule_, t1, ExecPolicy::serial()))
      if (embeds(*target_, w.result)) return true;
    return false;
  }

  void evaluate(const Skel& s, const std::vector<int>& block_of, const std::vector<GroupInfo>& blocks, int repairs) {
    if (s.size() > cap_) {
      note_cap();
      return;
    }
    DataTree t1 = concretize(s, block_of, blocks);
    const std::string key = canonical_print(t1);
    auto it = verdicts_.find(key);
    if (it == verdicts_.end()) {
      // Repairs only add nodes, so nothing grown from a tree beyond K can come back under it.
      const Check v = beyond_k(t1) ? Check::Hopeless : passes(t1) ? Check::Pass : Check::Fail;
      it = verdicts_.emplace(key, v).first;
    }
    if (it->second == Check::Pass) {
      if (accepted_.insert(key).second) out_.push_back(std::move(t1));
      return;
    }
    if (it->second == Check::Fail && rule_ && repairs < 2) repair(s, t1, block_of, blocks, repairs);
  }

  // The intended step leaves a kept node short of children its DTD rule needs: add them before the step.
  void repair(const Skel& s, const DataTree& t1, const std::vector<int>& block_of, const std::vector<GroupInfo>& blocks,
              int repairs) {
    const auto& loc = rule_->locator;
    Matching m;
    m.image = s.loc;
    for (NodeId n = 0; n < static_cast<NodeId>(loc.base.size()); ++n)
      if (loc.base.label(n).kind == PatternLabel::Kind::Variable) m.valuation[loc.base.label(n).name] = t1.label(m.image[n]).value;
    if (check_matching(*rule_, t1, m) != Blocked::None) return;
    if (!rule_->guard.is_true() && !eval_formula(rule_->guard, t1, m.image[loc.self()])) return;
    const DataTree t2 = apply(*rule_, t1, m);
    if (!sys_.dtd.root_labels.empty() && !sys_.dtd.root_labels.count(t2.label(t2.root()).tag)) return;
    std::vector<char> keep(t1.size(), 1);
    for (NodeId d : loc.dels)
      for (NodeId y = 0; y < static_cast<NodeId>(t1.size()); ++y)
        if (y == m.image[d] || t1.is_proper_ancestor(m.image[d], y)) keep[y] = 0;
    std::vector<NodeId> remap;
    (void)t1.filtered(keep, &remap);
    std::vector<char> surviving(t2.size(), 0);
    std::vector<std::pair<int, std::vector<std::vector<std::string>>>> fixes;
    for (NodeId x = 0; x < static_cast<NodeId>(t1.size()); ++x) {
      if (!keep[x]) continue;
      surviving[remap[x]] = 1;
      const NodeId y = remap[x];
      if (!t2.label(y).is_tag()) continue;
      auto rit = sys_.dtd.rules.find(t2.label(y).tag);
      if (rit == sys_.dtd.rules.end() || dtd_node_ok(t2, y, t2.label(y).tag, sys_.dtd)) continue;
      std::map<std::string, int> counts;
      int data = 0;
      for (NodeId c : t2.children(y)) {
        if (t2.label(c).is_data())
          ++data;
        else
          ++counts[t2.label(c).tag];
      }
      auto opts = deficits(rit->second, counts, data);
      if (opts.empty()) return;
      fixes.emplace_back(x, std::move(opts));
    }
    if (fixes.empty()) return;
    // Appended nodes cannot be repaired from the pre-state.
    for (NodeId y = 0; y < static_cast<NodeId>(t2.size()); ++y)
      if (!surviving[y] && t2.label(y).is_tag() && !dtd_node_ok(t2, y, t2.label(y).tag, sys_.dtd)) return;
    std::function<void(std::size_t, Skel&)> pick = [&](std::size_t i, Skel& cur) {
      if (i == fixes.size()) {
        const int from = s.size();
        complete(cur, from, [&](Skel& done) { finish(done, block_of, blocks, repairs + 1); });
        return;
      }
      const int x = fixes[i].first;
      for (const auto& add : fixes[i].second) {
        if (cur.nodes[x].depth + 1 > sys_.depth_bound) continue;
        if (cur.size() + static_cast<int>(add.size()) > cap_) {
          note_cap();
          continue;
        }
        Skel s2 = cur;
        for (const auto& tag : add) {
          if (tag.empty())
            s2.add(x, true, std::string(), s2.new_group());
          else
            s2.add(x, false, tag, -1);
        }
        pick(i + 1, s2);
      }
    };
    Skel start = s;
    pick(0, start);
  }

  const System& sys_;
  int cap_;
  bool cap_binding_;
  std::vector<std::string> sigma_;
  DataValue fresh_base_ = 0;
  bool capped_ = false;

  const Rule* rule_ = nullptr;
  const DataTree* target_ = nullptr;
  const TreePattern* goal_ = nullptr;
  const std::vector<char>* old_ = nullptr;
  std::vector<int> skel_of_;

  enum class Check { Pass, Fail, Hopeless };
  std::unordered_map<std::string, Check> verdicts_;
  std::unordered_set<std::string> accepted_;
  std::vector<DataTree> out_;
};

// Kept/appended splits of the target: the root is kept, a kept node's child may start an
// appended subtree when some append node of the rule could produce it there.
void enumerate_splits(const Rule& r, const DataTree& t, std::vector<std::vector<char>>& out) {
  const auto order = t.preorder();
  std::vector<char> old(t.size(), 1);
  auto may_append = [&](NodeId n) {
    const NodeId p = t.parent(n);
    if (!t.label(p).is_tag()) return false;
    for (const auto& [a, forest] : r.locator.appends) {
      const auto post = post_tag(r, a);
      if (post && *post != t.label(p).tag) continue;
      if (fits_forest(t, n, r, forest)) return true;
    }
    return false;
  };
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == order.size()) {
      out.push_back(old);
      return;
    }
    const NodeId n = order[i];
    if (n == t.root()) {
      go(i + 1);
      return;
    }
    if (!old[t.parent(n)]) {
      old[n] = 0;
      go(i + 1);
      old[n] = 1;
      return;
    }
    go(i + 1);
    if (may_append(n)) {
      old[n] = 0;
      go(i + 1);
      old[n] = 1;
    }
  };
  go(0);
}

void require_positive(const System& sys) {
  if (!sys.dtd.is_positive()) throw UsageError("backward analysis needs a positive DTD");
  if (!sys.invariant.is_positive()) throw UsageError("backward analysis needs a positive invariant");
  for (const auto& r : sys.rules)
    if (!r.guard.is_positive()) throw UsageError("backward analysis needs positive guards (rule " + r.name + ")");
}

}  // namespace

double pred_size_bound(const System& sys, const DataTree& t) {
  const double B = std::max(1, sys.depth_bound);
  const double sigma = static_cast<double>(sys.alphabet.size()) + 1;
  const double delta = std::max(1, sys.dtd.max_constant());
  double pieces = 0;
  for (const auto& r : sys.rules) {
    double g = 0;
    std::vector<const TreePattern*> atoms;
    r.guard.collect_atoms(atoms);
    for (const auto* a : atoms) g += static_cast<double>(a->size());
    double q = 0;
    for (const auto& [_, qq] : r.queries) q = std::max(q, static_cast<double>(qq.body.size()));
    pieces = std::max(pieces, static_cast<double>(r.locator.base.size()) + g + static_cast<double>(t.size()) * q);
  }
  const double v = B * B * std::pow(sigma * delta, B) * std::max(1.0, pieces);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

Basis pred_basis(const System& sys, const DataTree& t, int size_cap, const ExecPolicy& policy) {
  require_positive(sys);
  const bool binding = static_cast<double>(size_cap) < pred_size_bound(sys, t);
  struct Item {
    std::size_t rule;
    std::vector<char> old;
  };
  std::vector<Item> items;
  for (std::size_t r = 0; r < sys.rules.size(); ++r) {
    std::vector<std::vector<char>> splits;
    enumerate_splits(sys.rules[r], t, splits);
    for (auto& s : splits) items.push_back({r, std::move(s)});
  }
  std::vector<std::vector<DataTree>> found(items.size());
  std::vector<char> capped(items.size(), 0);
  parallel_for(items.size(), policy, [&](std::size_t i) {
    Gluer g(sys, size_cap, binding);
    g.pred(sys.rules[items[i].rule], t, items[i].old);
    found[i] = std::move(g.out());
    capped[i] = g.capped();
  });
  Basis b;
  std::vector<DataTree> all;
  for (std::size_t i = 0; i < items.size(); ++i) {
    b.capped = b.capped || capped[i];
    for (auto& x : found[i]) all.push_back(std::move(x));
  }
  b.trees = minimize(all, policy);
  return b;
}

Basis pattern_basis(const System& sys, const TreePattern& p, int size_cap, const ExecPolicy& policy) {
  require_positive(sys);
  if (p.is_relative()) throw UsageError("target pattern must not mark a self node");
  double bound = 1;
  for (int i = 0; i <= sys.depth_bound; ++i) bound *= static_cast<double>(sys.alphabet.size() + 1) * std::max(1, sys.dtd.max_constant());
  bound *= static_cast<double>(p.size());
  Gluer g(sys, size_cap, static_cast<double>(size_cap) < bound);
  g.pattern(p);
  Basis b;
  b.capped = g.capped();
  b.trees = minimize(g.out(), policy);
  return b;
}

}  // namespace dtprs
