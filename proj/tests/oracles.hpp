#pragma once

// Independent oracles and random generators shared by the unit tests and the acceptance suite.

#include "dtprs/analysis.hpp"
#include "dtprs/canon.hpp"
#include "dtprs/frontend.hpp"
#include "dtprs/order.hpp"
#include "dtprs/pcp.hpp"
#include "dtprs/rewrite.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace oracle {

using namespace dtprs;
using Rng = std::mt19937_64;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string case_path(const std::string& name) { return std::string(DTPRS_CASES_DIR) + "/" + name; }
inline std::string golden_path(const std::string& name) { return std::string(DTPRS_GOLDEN_DIR) + "/" + name; }
inline System load_system(const std::string& name) { return parse_system(read_file(case_path(name))); }
inline TreePattern load_pattern(const std::string& name) { return parse_pattern(read_file(case_path(name))); }
inline DataTree load_tree(const std::string& path) { return parse_tree(read_file(path)); }

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

// --- plain exhaustive longest simple path ----------------------------------

inline int naive_longest_path(const LabeledGraph& g) {
  const int n = static_cast<int>(g.vertex_count());
  std::vector<char> on(n, 0);
  int best = 0;
  std::function<void(int, int)> dfs = [&](int v, int len) {
    best = std::max(best, len);
    for (int w : g.neighbours(v))
      if (!on[w]) {
        on[w] = 1;
        dfs(w, len + 1);
        on[w] = 0;
      }
  };
  for (int s = 0; s < n; ++s) {
    on[s] = 1;
    dfs(s, 0);
    on[s] = 0;
  }
  return best;
}

// --- brute-force embedding --------------------------------------------------

// Tries every injective node map; only for small trees.
inline bool naive_embeds(const DataTree& a, const DataTree& b) {
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  if (n > m) return false;
  std::vector<int> img(n, -1);
  std::vector<char> used(m, 0);
  std::function<bool(int)> go = [&](int i) -> bool {
    if (i == n) {
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
          if (a.label(x).is_data() && a.label(y).is_data() &&
              (a.label(x).value == a.label(y).value) != (b.label(img[x]).value == b.label(img[y]).value))
            return false;
      return true;
    }
    for (int j = 0; j < m; ++j) {
      if (used[j]) continue;
      if (i == 0 && j != 0) continue;
      const auto& la = a.label(i);
      const auto& lb = b.label(j);
      if (la.kind != lb.kind || (la.is_tag() && la.tag != lb.tag)) continue;
      if (i > 0 && b.parent(j) != img[a.parent(i)]) continue;
      used[j] = 1;
      img[i] = j;
      if (go(i + 1)) return true;
      used[j] = 0;
    }
    img[i] = -1;
    return false;
  };
  // Node ids are in creation order, so parents precede children.
  return go(0);
}

// --- random trees -----------------------------------------------------------

struct TreeGen {
  std::vector<std::string> tags{"a", "b", "c"};
  int max_nodes = 12;
  int max_values = 4;
  int max_depth = 4;
  double data_leaf = 0.35;
  std::string root_tag;  // empty: any tag
};

inline DataTree random_tree(Rng& rng, const TreeGen& g) {
  const std::string root = g.root_tag.empty() ? g.tags[uniform(rng, 0, static_cast<int>(g.tags.size()) - 1)] : g.root_tag;
  DataTree t = DataTree::with_root_tag(root);
  const int target = uniform(rng, 1, g.max_nodes);
  int guard = 0;
  while (static_cast<int>(t.size()) < target && guard++ < 200) {
    std::vector<NodeId> hosts;
    for (NodeId n = 0; n < static_cast<NodeId>(t.size()); ++n)
      if (t.label(n).is_tag() && t.depth_of(n) < g.max_depth) hosts.push_back(n);
    if (hosts.empty()) break;
    const NodeId h = hosts[uniform(rng, 0, static_cast<int>(hosts.size()) - 1)];
    if (coin(rng, g.data_leaf))
      t.add_data(h, static_cast<DataValue>(uniform(rng, 0, g.max_values - 1)));
    else
      t.add_tag(h, g.tags[uniform(rng, 0, static_cast<int>(g.tags.size()) - 1)]);
  }
  return t;
}

// Same tree with storage order shuffled and data values renamed bijectively.
inline DataTree shuffled_copy(Rng& rng, const DataTree& t, DataValue offset = 0) {
  auto vals = t.data_values();
  std::vector<DataValue> perm = vals;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::map<DataValue, DataValue> ren;
  for (std::size_t i = 0; i < vals.size(); ++i) ren[vals[i]] = perm[i] + offset;
  DataTree out(t.label(t.root()).is_data() ? Label::make_data(ren.at(t.label(t.root()).value)) : t.label(t.root()));
  std::function<void(NodeId, NodeId)> copy = [&](NodeId from, NodeId to) {
    std::vector<NodeId> kids(t.children(from).begin(), t.children(from).end());
    std::shuffle(kids.begin(), kids.end(), rng);
    for (NodeId c : kids) {
      Label l = t.label(c);
      if (l.is_data()) l.value = ren.at(l.value);
      copy(c, out.add_child(to, l));
    }
  };
  copy(t.root(), out.root());
  return out;
}

// A tree that t embeds into: extra nodes added below tag nodes, then shuffled and renamed.
inline DataTree random_extension(Rng& rng, const DataTree& t, const TreeGen& g, int extra) {
  DataTree u = t;
  auto vals = t.data_values();
  DataValue next = vals.empty() ? 0 : vals.back() + 1;
  for (int i = 0; i < extra; ++i) {
    std::vector<NodeId> hosts;
    for (NodeId n = 0; n < static_cast<NodeId>(u.size()); ++n)
      if (u.label(n).is_tag() && u.depth_of(n) < g.max_depth) hosts.push_back(n);
    if (hosts.empty()) break;
    const NodeId h = hosts[uniform(rng, 0, static_cast<int>(hosts.size()) - 1)];
    if (coin(rng, g.data_leaf)) {
      auto cur = u.data_values();
      const bool reuse = !cur.empty() && coin(rng, 0.5);
      u.add_data(h, reuse ? cur[uniform(rng, 0, static_cast<int>(cur.size()) - 1)] : next++);
    } else {
      u.add_tag(h, g.tags[uniform(rng, 0, static_cast<int>(g.tags.size()) - 1)]);
    }
  }
  return shuffled_copy(rng, u);
}

// --- exhaustive tree enumeration ---------------------------------------------

// Every tree with at most max_nodes nodes over `tags` (root in `roots`, depth <= max_depth), one per
// equivalence class, grown one node at a time.
inline std::vector<DataTree> all_trees(const std::vector<std::string>& tags, const std::set<std::string>& roots,
                                       int max_nodes, int max_depth) {
  std::vector<DataTree> out;
  std::unordered_set<std::string> seen;
  std::vector<DataTree> layer;
  for (const auto& r : roots) {
    DataTree t = DataTree::with_root_tag(r);
    if (seen.insert(canonical_print(t)).second) {
      out.push_back(t);
      layer.push_back(t);
    }
  }
  for (int size = 2; size <= max_nodes; ++size) {
    std::vector<DataTree> next;
    for (const auto& t : layer) {
      auto vals = t.data_values();
      const DataValue fresh = vals.empty() ? 0 : vals.back() + 1;
      for (NodeId h = 0; h < static_cast<NodeId>(t.size()); ++h) {
        if (!t.label(h).is_tag() || t.depth_of(h) >= max_depth) continue;
        auto push = [&](Label l) {
          DataTree u = t;
          u.add_child(h, l);
          if (seen.insert(canonical_print(u)).second) {
            out.push_back(u);
            next.push_back(std::move(u));
          }
        };
        for (const auto& tag : tags) push(Label::make_tag(tag));
        for (DataValue v : vals) push(Label::make_data(v));
        push(Label::make_data(fresh));
      }
    }
    layer = std::move(next);
  }
  return out;
}

inline bool within_k(const System& sys, const DataTree& t) {
  return !sys.path_bound || naive_longest_path(graph_of(t)) <= *sys.path_bound;
}

// Minimal elements of {t1 : |t1| <= cap, t1 in Delta and K, some rule step t1 -> t2 with t ⪯ t2}.
inline std::vector<DataTree> exhaustive_pred(const System& sys, const DataTree& t, int cap) {
  std::vector<std::string> tags = sys.alphabet;
  std::set<std::string> roots = sys.dtd.root_labels;
  if (roots.empty()) roots.insert(tags.begin(), tags.end());
  std::vector<DataTree> hits;
  for (const auto& t1 : all_trees(tags, roots, cap, sys.depth_bound)) {
    if (!satisfies_invariant(sys, t1) || !within_k(sys, t1)) continue;
    bool ok = false;
    for (const auto& r : sys.rules) {
      for (const auto& w : enabled(sys, r, t1, ExecPolicy::serial()))
        if (embeds(t, w.result)) {
          ok = true;
          break;
        }
      if (ok) break;
    }
    if (ok) hits.push_back(t1);
  }
  std::vector<DataTree> minimal;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < hits.size() && !dominated; ++j)
      if (j != i && embeds(hits[j], hits[i]) && !(embeds(hits[i], hits[j]) && j > i)) dominated = true;
    if (!dominated) minimal.push_back(hits[i]);
  }
  return minimal;
}

// Same set up to equivalence, compared through canonical prints.
inline bool same_classes(const std::vector<DataTree>& a, const std::vector<DataTree>& b) {
  std::set<std::string> ka, kb;
  for (const auto& t : a) ka.insert(canonical_print(t));
  for (const auto& t : b) kb.insert(canonical_print(t));
  return ka == kb;
}

// --- forward exploration ------------------------------------------------------

struct BfsResult {
  std::optional<int> depth;  // first layer with a match
  std::size_t states = 0;
  bool exhausted = false;    // no new state within the bound
};

// Breadth-first search over every enabled step of every rule, deduplicated by canonical print.
inline BfsResult bfs_reach(const System& sys, const std::vector<DataTree>& init, const TreePattern& p, int max_depth) {
  BfsResult r;
  std::unordered_set<std::string> seen;
  std::vector<DataTree> layer;
  for (const auto& t : init)
    if (seen.insert(canonical_print(t)).second) layer.push_back(t);
  r.states = layer.size();
  for (int d = 0; d <= max_depth; ++d) {
    for (const auto& t : layer)
      if (matches_any(p, t)) {
        r.depth = d;
        return r;
      }
    if (d == max_depth) break;
    std::vector<DataTree> next;
    for (const auto& t : layer)
      for (const auto& rule : sys.rules)
        for (auto& w : enabled(sys, rule, t, ExecPolicy::serial()))
          if (seen.insert(canonical_print(w.result)).second) next.push_back(std::move(w.result));
    r.states += next.size();
    if (next.empty()) {
      r.exhausted = true;
      return r;
    }
    layer = std::move(next);
  }
  return r;
}

// --- PCP ----------------------------------------------------------------------

// Classic search: some non-empty index sequence of length <= max_len with equal concatenations.
inline std::optional<std::vector<int>> pcp_solve(const PcpPairs& pairs, int max_len) {
  std::optional<std::vector<int>> found;
  std::vector<int> seq;
  std::function<void(const std::string&, const std::string&)> go = [&](const std::string& u, const std::string& v) {
    if (found) return;
    if (!seq.empty() && u == v) {
      found = seq;
      return;
    }
    if (static_cast<int>(seq.size()) == max_len) return;
    for (int i = 0; i < static_cast<int>(pairs.size()); ++i) {
      const std::string nu = u + pairs[i].first, nv = v + pairs[i].second;
      const std::size_t k = std::min(nu.size(), nv.size());
      if (nu.compare(0, k, nv, 0, k) != 0) continue;
      seq.push_back(i);
      go(nu, nv);
      seq.pop_back();
      if (found) return;
    }
  };
  go("", "");
  return found;
}

// Solutions of the shape the encoding covers: start with the first pair, end with the last one used
// only there, V a proper prefix of U before the end.
inline std::optional<std::vector<int>> pcp_solve_shaped(const PcpPairs& pairs, int max_len) {
  const int last = static_cast<int>(pairs.size()) - 1;
  std::optional<std::vector<int>> found;
  std::vector<int> seq{0};
  std::function<void(const std::string&, const std::string&)> go = [&](const std::string& u, const std::string& v) {
    if (found || static_cast<int>(seq.size()) == max_len) return;
    for (int i = 0; i <= last; ++i) {
      const std::string nu = u + pairs[i].first, nv = v + pairs[i].second;
      if (i == last) {
        if (nu == nv) found = [&] { auto s = seq; s.push_back(i); return s; }();
        if (found) return;
        continue;
      }
      if (nv.size() >= nu.size() || nu.compare(0, nv.size(), nv) != 0) continue;
      seq.push_back(i);
      go(nu, nv);
      seq.pop_back();
      if (found) return;
    }
  };
  const auto& [u1, v1] = pairs.front();
  if (v1.size() < u1.size() && u1.compare(0, v1.size(), v1) == 0) go(u1, v1);
  return found;
}

// --- random positive systems -------------------------------------------------

// Small positive system over tags from {a, b, c} with root a, depth 3 and K = 10.
inline std::string random_positive_system(Rng& rng, int index) {
  const int ntags = uniform(rng, 2, 3);
  std::vector<std::string> tags{"a", "b", "c"};
  tags.resize(ntags);
  auto tag = [&]() { return tags[uniform(rng, 0, ntags - 1)]; };
  auto sub = [&]() { return tags[uniform(rng, 1, ntags - 1)]; };
  std::ostringstream os;
  os << "system random" << index << " {\n  alphabet { ";
  for (int i = 0; i < ntags; ++i) os << (i ? ", " : "") << tags[i];
  os << " }\n  dtd {\n    root: a;\n";
  if (coin(rng, 0.4)) os << "    b -> |dom| >= 1;\n";
  if (coin(rng, 0.25)) os << "    a -> |b| >= 1" << (coin(rng) ? " || |dom| >= 1" : "") << ";\n";
  os << "  }\n";
  if (coin(rng, 0.2)) os << "  invariant: [a](-[b]) || [a](-[c]);\n";
  os << "  bounds { depth: 3; simple-path: 10; }\n  init {\n    [a];\n  }\n";
  const int nrules = uniform(rng, 1, 2);
  for (int r = 0; r < nrules; ++r) {
    os << "  rule r" << r << " {\n    locator: ";
    // Locator: root a with one or two children; one of them carries the action.
    const int kind = uniform(rng, 0, 5);
    const std::string c1 = sub();
    const bool desc = coin(rng, 0.3);
    const std::string edge = desc ? "-" : "";
    std::string forest;
    switch (kind) {
      case 0:  // delete a child subtree
        os << "[a](" << edge << "[" << c1 << "{del}]" << (coin(rng) ? "($X)" : "") << ")";
        break;
      case 1:  // rename a child
        os << "[a](" << edge << "[" << c1 << "{ren=" << sub() << "}])";
        break;
      case 2:  // append below the root, copying a value
        os << "[a{append=F}](" << edge << "[" << c1 << "]($X))";
        forest = "[" + sub() + "]($X)";
        break;
      case 3:  // append a fresh value below a child
        os << "[a](" << edge << "[" << c1 << "{append=F}])";
        forest = coin(rng) ? "[" + sub() + "]($Z)" : "$Z";
        break;
      case 4:  // move a value: delete one node, append its value elsewhere
        os << "[a{append=F}](" << edge << "[" << c1 << "{del}]($X), [" << sub() << "])";
        forest = "[" + sub() + "]($X)";
        break;
      default:  // two values with a condition, rename one holder
        os << "[a](" << edge << "[" << c1 << "{ren=" << sub() << "}]($X), [" << sub() << "]($Y)) where $X "
           << (coin(rng) ? "==" : "!=") << " $Y";
        break;
    }
    os << ";\n";
    if (coin(rng, 0.3)) os << "    guard: [a](-[" << tag() << "]);\n";
    if (!forest.empty() && coin(rng, 0.2)) {
      os << "    query Q: [a](-[" << sub() << "]($V)) ~> [" << sub() << "]($V);\n";
      forest += ", Q";
    }
    if (!forest.empty()) os << "    forest F: " << forest << ";\n";
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

inline System random_positive(Rng& rng, int index) {
  for (;;) {
    try {
      return parse_system(random_positive_system(rng, index));
    } catch (const ParseError&) {
    }
  }
}

// Random Delta-tree of the system (root a), or nullopt after repeated failures.
inline std::optional<DataTree> random_delta_tree(Rng& rng, const System& sys, int max_nodes) {
  TreeGen g;
  g.tags = sys.alphabet;
  g.root_tag = "a";
  g.max_nodes = max_nodes;
  g.max_depth = sys.depth_bound;
  g.max_values = 3;
  for (int attempt = 0; attempt < 200; ++attempt) {
    DataTree t = random_tree(rng, g);
    if (satisfies_invariant(sys, t) && within_k(sys, t)) return t;
  }
  return std::nullopt;
}

}  // namespace oracle
