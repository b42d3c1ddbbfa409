#include "dtprs/order.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

namespace dtprs {

namespace {

// Kuhn's augmenting-path matching; ok(i, j) says left i may take right j.
bool perfect_left_matching(int left, int right, const std::function<bool(int, int)>& ok) {
  if (left > right) return false;
  std::vector<int> match_r(right, -1);
  std::vector<std::vector<int>> cand(left);
  for (int i = 0; i < left; ++i)
    for (int j = 0; j < right; ++j)
      if (ok(i, j)) cand[i].push_back(j);
  std::vector<char> seen;
  std::function<bool(int)> augment = [&](int i) -> bool {
    for (int j : cand[i]) {
      if (seen[j]) continue;
      seen[j] = 1;
      if (match_r[j] < 0 || augment(match_r[j])) {
        match_r[j] = i;
        return true;
      }
    }
    return false;
  };
  for (int i = 0; i < left; ++i) {
    if (cand[i].empty()) return false;
    seen.assign(right, 0);
    if (!augment(i)) return false;
  }
  return true;
}

class Embedder {
 public:
  Embedder(const DataTree& a, const DataTree& b) : a_(a), b_(b) {
    memo_.assign(a.size() * b.size(), -1);
    order_ = a.preorder();
    map_.assign(a.size(), kNoNode);
    used_.assign(b.size(), 0);
    sibling_index_.assign(a.size(), 0);
    for (NodeId n = 0; n < static_cast<NodeId>(a.size()); ++n) {
      auto ch = a.children(n);
      for (std::size_t i = 0; i < ch.size(); ++i) sibling_index_[ch[i]] = static_cast<int>(i);
    }
  }

  std::optional<Embedding> run() {
    if (a_.empty()) return Embedding{};
    if (b_.empty() || a_.size() > b_.size()) return std::nullopt;
    if (a_.data_values().size() > b_.data_values().size()) return std::nullopt;
    if (!feasible(0, 0)) return std::nullopt;
    bool nv;
    bind(0, 0, nv);
    if (!search(1)) return std::nullopt;
    return map_;
  }

 private:
  bool label_ok(NodeId x, NodeId y) const {
    const auto& la = a_.label(x);
    const auto& lb = b_.label(y);
    if (la.kind != lb.kind) return false;
    return la.is_data() || la.tag == lb.tag;
  }

  // Data-free subtree embedding test, memoized.
  bool feasible(NodeId x, NodeId y) {
    signed char& m = memo_[static_cast<std::size_t>(x) * b_.size() + y];
    if (m >= 0) return m;
    bool ok = label_ok(x, y);
    if (ok) {
      auto cx = a_.children(x);
      auto cy = b_.children(y);
      ok = perfect_left_matching(static_cast<int>(cx.size()), static_cast<int>(cy.size()),
                                 [&](int i, int j) { return feasible(cx[i], cy[j]); });
    }
    m = ok ? 1 : 0;
    return ok;
  }

  bool try_node(NodeId x, NodeId y) {
    const auto& la = a_.label(x);
    if (la.is_data()) {
      const DataValue vb = b_.label(y).value;
      auto it = fwd_.find(la.value);
      if (it != fwd_.end()) {
        if (it->second != vb) return false;
      } else if (bwd_.count(vb)) {
        return false;
      }
    }
    return true;
  }

  // Remaining later siblings of x must still fit into unused children of the parent image.
  bool siblings_fit(NodeId x, NodeId y_taken) {
    const NodeId px = a_.parent(x);
    auto cx = a_.children(px);
    const int first = sibling_index_[x] + 1;
    if (first >= static_cast<int>(cx.size())) return true;
    std::vector<NodeId> rest_b;
    for (NodeId c : b_.children(map_[px]))
      if (!used_[c] && c != y_taken) rest_b.push_back(c);
    const int left = static_cast<int>(cx.size()) - first;
    return perfect_left_matching(left, static_cast<int>(rest_b.size()),
                                 [&](int i, int j) { return feasible(cx[first + i], rest_b[j]); });
  }

  void bind(NodeId x, NodeId y, bool& new_value) {
    map_[x] = y;
    used_[y] = 1;
    new_value = false;
    if (a_.label(x).is_data() && !fwd_.count(a_.label(x).value)) {
      fwd_[a_.label(x).value] = b_.label(y).value;
      bwd_[b_.label(y).value] = a_.label(x).value;
      new_value = true;
    }
  }

  void unbind(NodeId x, NodeId y, bool new_value) {
    if (new_value) {
      bwd_.erase(b_.label(y).value);
      fwd_.erase(a_.label(x).value);
    }
    used_[y] = 0;
    map_[x] = kNoNode;
  }

  bool search(std::size_t i) {
    if (i == order_.size()) return true;
    const NodeId x = order_[i];
    const NodeId py = map_[a_.parent(x)];
    for (NodeId y : b_.children(py)) {
      if (used_[y] || !feasible(x, y) || !try_node(x, y)) continue;
      if (!siblings_fit(x, y)) continue;
      bool nv;
      bind(x, y, nv);
      if (search(i + 1)) return true;
      unbind(x, y, nv);
    }
    return false;
  }

  const DataTree& a_;
  const DataTree& b_;
  std::vector<signed char> memo_;
  std::vector<NodeId> order_;
  Embedding map_;
  std::vector<char> used_;
  std::vector<int> sibling_index_;
  std::map<DataValue, DataValue> fwd_, bwd_;
};

}  // namespace

std::optional<Embedding> embeds(const DataTree& t1, const DataTree& t2) {
  if (t1.size() == 1 && t2.size() >= 1) {
    const auto& a = t1.label(0);
    const auto& b = t2.label(0);
    if (a.kind != b.kind || (a.is_tag() && a.tag != b.tag)) return std::nullopt;
    return Embedding{0};
  }
  Embedder e(t1, t2);
  auto r = e.run();
  if (r && !r->empty()) (*r)[0] = 0;
  return r;
}

bool is_embedding(const DataTree& t1, const DataTree& t2, const Embedding& e) {
  if (e.size() != t1.size()) return false;
  if (t1.empty()) return true;
  if (e[0] != 0) return false;
  std::vector<char> used(t2.size(), 0);
  for (NodeId x = 0; x < static_cast<NodeId>(t1.size()); ++x) {
    const NodeId y = e[x];
    if (y < 0 || y >= static_cast<NodeId>(t2.size()) || used[y]) return false;
    used[y] = 1;
    const auto& la = t1.label(x);
    const auto& lb = t2.label(y);
    if (la.kind != lb.kind || (la.is_tag() && la.tag != lb.tag)) return false;
    if (x != 0 && t2.parent(y) != e[t1.parent(x)]) return false;
  }
  for (NodeId x = 0; x < static_cast<NodeId>(t1.size()); ++x) {
    if (!t1.label(x).is_data()) continue;
    for (NodeId z = x + 1; z < static_cast<NodeId>(t1.size()); ++z) {
      if (!t1.label(z).is_data()) continue;
      const bool eq1 = t1.label(x).value == t1.label(z).value;
      const bool eq2 = t2.label(e[x]).value == t2.label(e[z]).value;
      if (eq1 != eq2) return false;
    }
  }
  return true;
}

bool equivalent(const DataTree& t1, const DataTree& t2) {
  if (t1.size() != t2.size() || t1.data_leaf_count() != t2.data_leaf_count()) return false;
  if (t1.data_values().size() != t2.data_values().size()) return false;
  return embeds(t1, t2).has_value();
}

// ---------------------------------------------------------------------------

std::optional<std::vector<int>> induced_subgraph_map(const LabeledGraph& g1, const LabeledGraph& g2) {
  const int n1 = static_cast<int>(g1.vertex_count());
  const int n2 = static_cast<int>(g2.vertex_count());
  if (n1 > n2) return std::nullopt;
  {
    std::map<GraphLabel, int> c1, c2;
    for (int v = 0; v < n1; ++v) ++c1[g1.label(v)];
    for (int v = 0; v < n2; ++v) ++c2[g2.label(v)];
    for (const auto& [l, k] : c1)
      if (c2[l] < k) return std::nullopt;
  }
  // BFS order so most vertices have an already-placed neighbour.
  std::vector<int> order, anchor(n1, -1);
  std::vector<char> seen(n1, 0);
  for (int s = 0; s < n1; ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    std::size_t head = order.size();
    order.push_back(s);
    while (head < order.size()) {
      const int u = order[head++];
      for (int w : g1.neighbours(u))
        if (!seen[w]) {
          seen[w] = 1;
          anchor[w] = u;
          order.push_back(w);
        }
    }
  }
  std::vector<int> img(n1, -1);
  std::vector<char> used(n2, 0);
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (i == order.size()) return true;
    const int v = order[i];
    std::vector<int> cands;
    if (anchor[v] >= 0) {
      auto nb = g2.neighbours(img[anchor[v]]);
      cands.assign(nb.begin(), nb.end());
    } else {
      cands.resize(n2);
      for (int j = 0; j < n2; ++j) cands[j] = j;
    }
    for (int c : cands) {
      if (used[c] || !(g1.label(v) == g2.label(c)) || g1.degree(v) > g2.degree(c)) continue;
      bool ok = true;
      for (std::size_t k = 0; k < i && ok; ++k) {
        const int w = order[k];
        ok = g1.adjacent(v, w) == g2.adjacent(c, img[w]);
      }
      if (!ok) continue;
      img[v] = c;
      used[c] = 1;
      if (go(i + 1)) return true;
      used[c] = 0;
      img[v] = -1;
    }
    return false;
  };
  if (!go(0)) return std::nullopt;
  return img;
}

bool induced_subgraph(const LabeledGraph& g1, const LabeledGraph& g2) {
  return induced_subgraph_map(g1, g2).has_value();
}

// ---------------------------------------------------------------------------

int TreeDecomposition::width() const {
  int w = 0;
  for (const auto& b : bags) {
    auto s = b;
    std::sort(s.begin(), s.end());
    w = std::max(w, static_cast<int>(std::unique(s.begin(), s.end()) - s.begin()));
  }
  return w - 1;
}

int TreeDecomposition::depth() const {
  int best = 0;
  for (std::size_t u = 0; u < parent.size(); ++u) {
    int d = 0;
    for (int p = parent[u]; p != kNoNode; p = parent[p]) ++d;
    best = std::max(best, d);
  }
  return best;
}

TreeDecomposition dfs_decomposition(const LabeledGraph& g, int K) {
  if (K < 0) throw std::invalid_argument("dfs_decomposition: negative K");
  const int n = static_cast<int>(g.vertex_count());
  if (n == 0) throw std::invalid_argument("dfs_decomposition: empty graph");
  if (!g.connected()) throw std::invalid_argument("dfs_decomposition: graph is not connected");
  TreeDecomposition d;
  std::vector<int> node_of(n, -1);
  std::vector<int> path;  // current DFS ancestry (graph vertices)
  auto open = [&](int v, int parent_node) {
    if (static_cast<int>(path.size()) + 1 > K + 1)
      throw std::invalid_argument("dfs_decomposition: DFS depth exceeds K=" + std::to_string(K));
    const int u = static_cast<int>(d.bags.size());
    node_of[v] = u;
    std::vector<int> bag = path;
    bag.push_back(v);
    bag.resize(K + 1, v);
    d.bags.push_back(std::move(bag));
    d.parent.push_back(parent_node);
    d.children.emplace_back();
    d.vertex.push_back(v);
    if (parent_node != kNoNode) d.children[parent_node].push_back(u);
    path.push_back(v);
  };
  std::vector<std::pair<int, std::size_t>> stack;
  open(0, kNoNode);
  stack.emplace_back(0, 0);
  while (!stack.empty()) {
    auto& [v, i] = stack.back();
    auto nb = g.neighbours(v);
    if (i < nb.size()) {
      const int w = nb[i++];
      if (node_of[w] < 0) {
        const int pu = node_of[v];
        open(w, pu);
        stack.emplace_back(w, 0);
      }
    } else {
      path.pop_back();
      stack.pop_back();
    }
  }
  return d;
}

bool is_valid_decomposition(const LabeledGraph& g, const TreeDecomposition& d) {
  const int n = static_cast<int>(g.vertex_count());
  std::vector<std::vector<int>> holders(n);
  for (std::size_t u = 0; u < d.size(); ++u) {
    auto b = d.bags[u];
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    for (int v : b) holders[v].push_back(static_cast<int>(u));
  }
  for (int v = 0; v < n; ++v) {
    if (holders[v].empty()) return false;
    // Connected support: exactly one holder whose parent does not hold v.
    int tops = 0;
    for (int u : holders[v]) {
      const int p = d.parent[u];
      if (p == kNoNode || std::find(d.bags[p].begin(), d.bags[p].end(), v) == d.bags[p].end()) ++tops;
    }
    if (tops != 1) return false;
    for (int w : g.neighbours(v)) {
      if (w < v) continue;
      bool covered = false;
      for (int u : holders[v])
        if (std::find(d.bags[u].begin(), d.bags[u].end(), w) != d.bags[u].end()) covered = true;
      if (!covered) return false;
    }
  }
  return true;
}

EncodedTree encode(const TreeDecomposition& d, const LabeledGraph& g) {
  EncodedTree e;
  e.parent = d.parent;
  e.children = d.children;
  if (d.size() == 0) return e;
  const std::size_t width = d.bags[0].size();
  for (std::size_t u = 0; u < d.size(); ++u) {
    const auto& bag = d.bags[u];
    if (bag.size() != width) throw std::invalid_argument("encode: bag length mismatch");
    EncodedLabel l;
    for (int v : bag) l.word.push_back(g.label(v));
    for (std::size_t i = 0; i < width; ++i)
      for (std::size_t j = 0; j < width; ++j) {
        if (bag[i] == bag[j]) l.l1.emplace_back(i, j);
        if (bag[i] != bag[j] && g.adjacent(bag[i], bag[j])) l.l2.emplace_back(i, j);
        if (d.parent[u] != kNoNode && d.bags[d.parent[u]][i] == bag[j]) l.l3.emplace_back(i, j);
      }
    e.labels.push_back(std::move(l));
  }
  return e;
}

bool label_tree_embeds(const EncodedTree& e1, const EncodedTree& e2) {
  if (e1.size() == 0) return true;
  if (e2.size() == 0 || e1.size() > e2.size()) return false;
  std::vector<signed char> memo(e1.size() * e2.size(), -1);
  std::function<bool(int, int)> fits = [&](int x, int y) -> bool {
    signed char& m = memo[static_cast<std::size_t>(x) * e2.size() + y];
    if (m >= 0) return m;
    bool ok = e1.labels[x] == e2.labels[y];
    if (ok) {
      const auto& cx = e1.children[x];
      const auto& cy = e2.children[y];
      ok = perfect_left_matching(static_cast<int>(cx.size()), static_cast<int>(cy.size()),
                                 [&](int i, int j) { return fits(cx[i], cy[j]); });
    }
    m = ok ? 1 : 0;
    return ok;
  };
  return fits(0, 0);
}

std::uint64_t path_length_bound(int A, int B) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t base = static_cast<std::uint64_t>(A) + 2;
  std::uint64_t power = 1, sum = 0;
  for (int i = 1; i <= B; ++i) {
    if (power > kMax / base) return kMax;
    power *= base;
    if (sum > kMax - power) return kMax;
    sum += power;
  }
  if (sum > kMax - power) return kMax;
  return power + sum;
}

}  // namespace dtprs
