#include "dtprs/tree.hpp"

#include "dtprs/parallel.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace dtprs {

ExecPolicy& default_policy() {
  static ExecPolicy policy;
  return policy;
}

DataTree::DataTree(Label root_label) { nodes_.push_back(Node{std::move(root_label), kNoNode, {}}); }

NodeId DataTree::add_child(NodeId parent, Label label) {
  if (parent < 0 || static_cast<std::size_t>(parent) >= nodes_.size())
    throw std::out_of_range("add_child: bad parent id");
  if (nodes_[parent].label.is_data()) throw std::invalid_argument("data leaves cannot have children");
  const NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(Node{std::move(label), parent, {}});
  nodes_[parent].children.push_back(id);
  return id;
}

NodeId DataTree::graft(NodeId parent, const DataTree& other) {
  std::vector<NodeId> map(other.size(), kNoNode);
  for (NodeId n : other.preorder()) {
    const NodeId p = other.parent(n) == kNoNode ? parent : map[other.parent(n)];
    map[n] = add_child(p, other.label(n));
  }
  return map[0];
}

void DataTree::set_tag(NodeId n, std::string tag) {
  if (nodes_[n].label.is_data()) throw std::invalid_argument("cannot rename a data leaf");
  nodes_[n].label.tag = std::move(tag);
}

void DataTree::set_value(NodeId n, DataValue v) {
  if (!nodes_[n].label.is_data()) throw std::invalid_argument("not a data leaf");
  nodes_[n].label.value = v;
}

int DataTree::depth_of(NodeId n) const {
  int d = 0;
  while (nodes_[n].parent != kNoNode) {
    n = nodes_[n].parent;
    ++d;
  }
  return d;
}

bool DataTree::is_proper_ancestor(NodeId anc, NodeId n) const {
  for (NodeId p = nodes_[n].parent; p != kNoNode; p = nodes_[p].parent)
    if (p == anc) return true;
  return false;
}

std::vector<NodeId> DataTree::descendants(NodeId n) const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack(nodes_[n].children.rbegin(), nodes_[n].children.rend());
  while (!stack.empty()) {
    const NodeId c = stack.back();
    stack.pop_back();
    out.push_back(c);
    for (auto it = nodes_[c].children.rbegin(); it != nodes_[c].children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<NodeId> DataTree::preorder() const {
  if (nodes_.empty()) return {};
  std::vector<NodeId> out{0};
  auto rest = descendants(0);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::vector<DataValue> DataTree::data_values() const {
  std::vector<DataValue> vals;
  for (const auto& n : nodes_)
    if (n.label.is_data()) vals.push_back(n.label.value);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  return vals;
}

std::size_t DataTree::data_leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.label.is_data(); }));
}

DataTree DataTree::filtered(const std::vector<char>& keep, std::vector<NodeId>* old_to_new) const {
  DataTree out;
  std::vector<NodeId> map(nodes_.size(), kNoNode);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!keep[i]) continue;
    const NodeId p = nodes_[i].parent;
    if (p == kNoNode) {
      out.nodes_.push_back(Node{nodes_[i].label, kNoNode, {}});
      map[i] = 0;
    } else {
      if (map[p] == kNoNode) throw std::invalid_argument("filtered: kept node below dropped parent");
      map[i] = out.add_child(map[p], nodes_[i].label);
    }
  }
  if (old_to_new) *old_to_new = std::move(map);
  return out;
}

DataTree DataTree::renamed(const std::map<DataValue, DataValue>& values) const {
  DataTree out = *this;
  for (auto& n : out.nodes_)
    if (n.label.is_data()) {
      auto it = values.find(n.label.value);
      if (it != values.end()) n.label.value = it->second;
    }
  return out;
}

int depth(const DataTree& t) {
  if (t.empty()) return 0;
  std::vector<int> d(t.size(), 0);
  int best = 0;
  for (NodeId n : t.preorder()) {
    if (t.parent(n) != kNoNode) d[n] = d[t.parent(n)] + 1;
    best = std::max(best, d[n]);
  }
  return best;
}

// ---------------------------------------------------------------------------

bool CountFormula::eval(const std::map<std::string, int>& tag_counts, int data_count) const {
  switch (op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Atom: {
      if (dom) return data_count >= at_least;
      auto it = tag_counts.find(symbol);
      return (it == tag_counts.end() ? 0 : it->second) >= at_least;
    }
    case Op::And:
      return std::all_of(args.begin(), args.end(), [&](const auto& a) { return a.eval(tag_counts, data_count); });
    case Op::Or:
      return std::any_of(args.begin(), args.end(), [&](const auto& a) { return a.eval(tag_counts, data_count); });
    case Op::Not: return !args.front().eval(tag_counts, data_count);
  }
  return false;
}

bool CountFormula::is_positive() const {
  if (op == Op::Not) return false;
  return std::all_of(args.begin(), args.end(), [](const auto& a) { return a.is_positive(); });
}

void CountFormula::collect_tags(std::set<std::string>& out) const {
  if (op == Op::Atom && !dom) out.insert(symbol);
  for (const auto& a : args) a.collect_tags(out);
}

int CountFormula::max_constant() const {
  int m = op == Op::Atom ? at_least : 0;
  for (const auto& a : args) m = std::max(m, a.max_constant());
  return m;
}

std::vector<std::vector<CountFormula>> CountFormula::positive_dnf() const {
  switch (op) {
    case Op::True: return {{}};
    case Op::False: return {};
    case Op::Atom: return {{*this}};
    case Op::Or: {
      std::vector<std::vector<CountFormula>> out;
      for (const auto& a : args) {
        auto sub = a.positive_dnf();
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    case Op::And: {
      std::vector<std::vector<CountFormula>> acc{{}};
      for (const auto& a : args) {
        auto sub = a.positive_dnf();
        std::vector<std::vector<CountFormula>> next;
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
  throw std::invalid_argument("positive_dnf: formula contains negation");
}

bool Dtd::is_positive() const {
  return std::all_of(rules.begin(), rules.end(), [](const auto& r) { return r.second.is_positive(); });
}

std::vector<std::string> Dtd::dependency_cycle() const {
  std::map<std::string, int> state;  // 0 unvisited, 1 on stack, 2 done
  std::vector<std::string> stack;
  std::vector<std::string> cycle;
  std::function<bool(const std::string&)> visit = [&](const std::string& a) -> bool {
    state[a] = 1;
    stack.push_back(a);
    auto it = rules.find(a);
    if (it != rules.end()) {
      std::set<std::string> deps;
      it->second.collect_tags(deps);
      for (const auto& b : deps) {
        if (state[b] == 1) {
          auto pos = std::find(stack.begin(), stack.end(), b);
          cycle.assign(pos, stack.end());
          cycle.push_back(b);
          return true;
        }
        if (state[b] == 0 && visit(b)) return true;
      }
    }
    stack.pop_back();
    state[a] = 2;
    return false;
  };
  for (const auto& [tag, _] : rules)
    if (state[tag] == 0 && visit(tag)) return cycle;
  return {};
}

int Dtd::max_constant() const {
  int m = 0;
  for (const auto& [_, f] : rules) m = std::max(m, f.max_constant());
  return m;
}

bool dtd_node_ok(const DataTree& t, NodeId n, const std::string& tag, const Dtd& d) {
  auto it = d.rules.find(tag);
  if (it == d.rules.end()) return true;
  std::map<std::string, int> counts;
  int data = 0;
  for (NodeId c : t.children(n)) {
    if (t.label(c).is_data())
      ++data;
    else
      ++counts[t.label(c).tag];
  }
  return it->second.eval(counts, data);
}

bool dtd_check(const DataTree& t, const Dtd& d) {
  if (t.empty() || !t.label(t.root()).is_tag()) return false;
  if (!d.root_labels.count(t.label(t.root()).tag)) return false;
  for (NodeId n = 0; n < static_cast<NodeId>(t.size()); ++n)
    if (t.label(n).is_tag() && !dtd_node_ok(t, n, t.label(n).tag, d)) return false;
  return true;
}

int dtd_depth_bound(const Dtd& d) {
  auto cycle = d.dependency_cycle();
  if (!cycle.empty()) {
    std::string msg = "recursive DTD, tag cycle:";
    for (const auto& c : cycle) msg += " " + c;
    throw RecursionError(msg, cycle);
  }
  std::map<std::string, int> memo;
  std::function<int(const std::string&)> longest = [&](const std::string& a) -> int {
    if (auto it = memo.find(a); it != memo.end()) return it->second;
    int best = 0;
    if (auto it = d.rules.find(a); it != d.rules.end()) {
      std::set<std::string> deps;
      it->second.collect_tags(deps);
      for (const auto& b : deps) best = std::max(best, 1 + longest(b));
    }
    return memo[a] = best;
  };
  int best = 0;
  for (const auto& r : d.root_labels) best = std::max(best, longest(r));
  return best + 1;
}

// ---------------------------------------------------------------------------

std::string to_string(const GraphLabel& l) {
  switch (l.kind) {
    case GraphLabel::Kind::Tag: return "(" + l.tag + "," + std::to_string(l.depth) + ")";
    case GraphLabel::Kind::DataLeaf: return "(#," + std::to_string(l.depth) + ")";
    case GraphLabel::Kind::Value: return "$";
  }
  return "?";
}

int LabeledGraph::add_vertex(GraphLabel label) {
  labels_.push_back(std::move(label));
  adj_.emplace_back();
  return static_cast<int>(labels_.size()) - 1;
}

void LabeledGraph::add_edge(int u, int v) {
  if (u == v) throw std::invalid_argument("self-loop");
  if (adjacent(u, v)) return;
  adj_[u].insert(std::lower_bound(adj_[u].begin(), adj_[u].end(), v), v);
  adj_[v].insert(std::lower_bound(adj_[v].begin(), adj_[v].end(), u), u);
}

std::size_t LabeledGraph::edge_count() const {
  std::size_t s = 0;
  for (const auto& a : adj_) s += a.size();
  return s / 2;
}

bool LabeledGraph::adjacent(int u, int v) const {
  return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
}

bool LabeledGraph::connected() const {
  if (labels_.empty()) return true;
  std::vector<char> seen(labels_.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int w : adj_[u])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
  }
  return count == labels_.size();
}

LabeledGraph graph_of(const DataTree& t, std::optional<int> depth_bound) {
  LabeledGraph g;
  std::vector<int> d(t.size(), 0);
  for (NodeId n : t.preorder())
    if (t.parent(n) != kNoNode) d[n] = d[t.parent(n)] + 1;
  for (NodeId n = 0; n < static_cast<NodeId>(t.size()); ++n) {
    if (depth_bound && d[n] > *depth_bound)
      throw BoundViolation("tree depth " + std::to_string(d[n]) + " exceeds bound " + std::to_string(*depth_bound));
    const auto& l = t.label(n);
    g.add_vertex(l.is_tag() ? GraphLabel{GraphLabel::Kind::Tag, l.tag, d[n]}
                            : GraphLabel{GraphLabel::Kind::DataLeaf, {}, d[n]});
  }
  std::map<DataValue, int> value_vertex;
  for (DataValue v : t.data_values()) value_vertex[v] = g.add_vertex(GraphLabel{GraphLabel::Kind::Value, {}, 0});
  for (NodeId n = 0; n < static_cast<NodeId>(t.size()); ++n) {
    if (t.parent(n) != kNoNode) g.add_edge(n, t.parent(n));
    if (t.label(n).is_data()) g.add_edge(n, value_vertex.at(t.label(n).value));
  }
  return g;
}

namespace {

// Pendant trees are peeled off first: h[v] is the height of the tree hanging at v and
// `within` the longest path inside hanging trees. The exhaustive search then only walks the
// 2-core, where a path from s to t is worth h[s] + edges + h[t].
struct Core {
  std::vector<int> h;
  std::vector<char> alive;
  int within = 0;
};

Core peel(const LabeledGraph& g) {
  const int n = static_cast<int>(g.vertex_count());
  Core c{std::vector<int>(n, 0), std::vector<char>(n, 1), 0};
  std::vector<int> deg(n);
  std::vector<int> queue;
  for (int v = 0; v < n; ++v) {
    deg[v] = g.degree(v);
    if (deg[v] <= 1) queue.push_back(v);
  }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const int u = queue[qi];
    if (!c.alive[u]) continue;
    c.alive[u] = 0;
    for (int w : g.neighbours(u)) {
      if (!c.alive[w]) continue;
      c.within = std::max(c.within, c.h[w] + c.h[u] + 1);
      c.h[w] = std::max(c.h[w], c.h[u] + 1);
      if (--deg[w] == 1) queue.push_back(w);
    }
  }
  return c;
}

int longest_from(const LabeledGraph& g, const Core& c, int start, int best) {
  const int n = static_cast<int>(g.vertex_count());
  std::vector<char> on_path(n, 0);
  // Iterative DFS over the core: frame = (vertex, next neighbour index).
  std::vector<std::pair<int, std::size_t>> stack{{start, 0}};
  on_path[start] = 1;
  while (!stack.empty()) {
    auto& [v, i] = stack.back();
    auto nb = g.neighbours(v);
    if (i < nb.size()) {
      const int w = nb[i++];
      if (!c.alive[w] || on_path[w]) continue;
      best = std::max(best, c.h[start] + static_cast<int>(stack.size()) + c.h[w]);
      on_path[w] = 1;
      stack.emplace_back(w, 0);
    } else {
      on_path[v] = 0;
      stack.pop_back();
    }
  }
  return best;
}

}  // namespace

int longest_simple_path(const LabeledGraph& g) { return longest_simple_path(g, default_policy()); }

int longest_simple_path(const LabeledGraph& g, const ExecPolicy& policy) {
  const int n = static_cast<int>(g.vertex_count());
  const Core c = peel(g);
  int best = c.within;
  if (policy.parallel) {
#pragma omp parallel for schedule(dynamic) reduction(max : best)
    for (int s = 0; s < n; ++s)
      if (c.alive[s]) best = std::max(best, longest_from(g, c, s, best));
  } else {
    for (int s = 0; s < n; ++s)
      if (c.alive[s]) best = std::max(best, longest_from(g, c, s, best));
  }
  return best;
}

}  // namespace dtprs
