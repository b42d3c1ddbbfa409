#pragma once

#include "dtprs/tree.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace dtprs {

// Node map from t1 into t2, indexed by t1 node id.
using Embedding = std::vector<NodeId>;

// Witness of t1 ⪯ t2: injective, root preserving, parent-child preserving, tag preserving,
// and preserving equality/inequality of data values in both directions.
std::optional<Embedding> embeds(const DataTree& t1, const DataTree& t2);
bool is_embedding(const DataTree& t1, const DataTree& t2, const Embedding& e);
bool equivalent(const DataTree& t1, const DataTree& t2);

// Injective label-preserving map with adjacency preserved in both directions.
std::optional<std::vector<int>> induced_subgraph_map(const LabeledGraph& g1, const LabeledGraph& g2);
bool induced_subgraph(const LabeledGraph& g1, const LabeledGraph& g2);

struct TreeDecomposition {
  std::vector<int> parent;                 // kNoNode at the root (node 0)
  std::vector<std::vector<int>> children;
  std::vector<std::vector<int>> bags;      // each of length K+1, repetitions allowed
  std::vector<int> vertex;                 // graph vertex the node was created for

  std::size_t size() const { return bags.size(); }
  int width() const;  // max distinct bag size - 1
  int depth() const;  // root has depth 0
};

// DFS tree from vertex 0, neighbours in ascending order. Bag of v = DFS ancestors then v,
// padded with v up to K+1 entries. Throws on disconnected input or when a bag would exceed K+1.
TreeDecomposition dfs_decomposition(const LabeledGraph& g, int K);
// Every edge inside a bag, vertex supports connected.
bool is_valid_decomposition(const LabeledGraph& g, const TreeDecomposition& d);

struct EncodedLabel {
  std::vector<GraphLabel> word;
  std::vector<std::pair<int, int>> l1, l2, l3;  // sorted position pairs

  friend bool operator==(const EncodedLabel&, const EncodedLabel&) = default;
  friend auto operator<=>(const EncodedLabel&, const EncodedLabel&) = default;
};

struct EncodedTree {
  std::vector<int> parent;
  std::vector<std::vector<int>> children;
  std::vector<EncodedLabel> labels;
  std::size_t size() const { return labels.size(); }
};

EncodedTree encode(const TreeDecomposition& d, const LabeledGraph& g);

// Plain labeled-tree embedding (labels equal, root and parent-child preserved, injective).
bool label_tree_embeds(const EncodedTree& e1, const EncodedTree& e2);

// Upper bound on simple-path length for a graph with a decomposition of width A and depth B:
// (A+2)^B + sum_{i=1..B} (A+2)^i, saturating at UINT64_MAX.
std::uint64_t path_length_bound(int A, int B);

}  // namespace dtprs
