#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtprs {

using DataValue = std::uint32_t;
using NodeId = int;
inline constexpr NodeId kNoNode = -1;

class BoundViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RecursionError : public std::runtime_error {
 public:
  RecursionError(const std::string& what, std::vector<std::string> cycle)
      : std::runtime_error(what), cycle_(std::move(cycle)) {}
  const std::vector<std::string>& cycle() const { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

struct Label {
  enum class Kind : std::uint8_t { Tag, Data };

  Kind kind = Kind::Tag;
  std::string tag;
  DataValue value = 0;

  static Label make_tag(std::string t) { return Label{Kind::Tag, std::move(t), 0}; }
  static Label make_data(DataValue v) { return Label{Kind::Data, {}, v}; }

  bool is_tag() const { return kind == Kind::Tag; }
  bool is_data() const { return kind == Kind::Data; }

  friend bool operator==(const Label&, const Label&) = default;
};

// Rooted unordered tree. Node ids are dense indices, the root is always 0.
// Sibling order in storage carries no meaning; it only makes traces reproducible.
class DataTree {
 public:
  DataTree() = default;
  explicit DataTree(Label root_label);
  static DataTree with_root_tag(std::string tag) { return DataTree(Label::make_tag(std::move(tag))); }

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  NodeId root() const { return 0; }

  NodeId add_child(NodeId parent, Label label);
  NodeId add_tag(NodeId parent, std::string tag) { return add_child(parent, Label::make_tag(std::move(tag))); }
  NodeId add_data(NodeId parent, DataValue v) { return add_child(parent, Label::make_data(v)); }

  // Copies `other` as a new subtree below `parent`; returns the id of the copied root.
  NodeId graft(NodeId parent, const DataTree& other);

  const Label& label(NodeId n) const { return nodes_[n].label; }
  NodeId parent(NodeId n) const { return nodes_[n].parent; }
  std::span<const NodeId> children(NodeId n) const { return nodes_[n].children; }
  bool is_leaf(NodeId n) const { return nodes_[n].children.empty(); }

  void set_tag(NodeId n, std::string tag);
  void set_value(NodeId n, DataValue v);

  int depth_of(NodeId n) const;
  bool is_proper_ancestor(NodeId anc, NodeId n) const;
  // Proper descendants of n in preorder.
  std::vector<NodeId> descendants(NodeId n) const;
  std::vector<NodeId> preorder() const;

  // Distinct data values, ascending.
  std::vector<DataValue> data_values() const;
  std::size_t data_leaf_count() const;

  // Returns a copy keeping only nodes with keep[n] set (must be closed under parent),
  // with relative order preserved. old_to_new receives the id map (kNoNode for dropped).
  DataTree filtered(const std::vector<char>& keep, std::vector<NodeId>* old_to_new = nullptr) const;

  // Applies a value map to every data leaf.
  DataTree renamed(const std::map<DataValue, DataValue>& values) const;

  friend bool operator==(const DataTree&, const DataTree&) = default;

 private:
  struct Node {
    Label label;
    NodeId parent = kNoNode;
    std::vector<NodeId> children;
    friend bool operator==(const Node&, const Node&) = default;
  };
  std::vector<Node> nodes_;
};

int depth(const DataTree& t);

// ---------------------------------------------------------------------------
// DTDs over unordered children: per-tag Boolean formulas over |b| >= k atoms.

struct CountFormula {
  enum class Op : std::uint8_t { True, False, Atom, And, Or, Not };

  Op op = Op::True;
  std::string symbol;  // tag name, or empty when `dom`
  bool dom = false;
  int at_least = 0;
  std::vector<CountFormula> args;

  static CountFormula truth() { return {}; }
  static CountFormula falsity() { return {Op::False, {}, false, 0, {}}; }
  static CountFormula tag_atom(std::string tag, int k) { return {Op::Atom, std::move(tag), false, k, {}}; }
  static CountFormula dom_atom(int k) { return {Op::Atom, {}, true, k, {}}; }
  static CountFormula conj(std::vector<CountFormula> a) { return {Op::And, {}, false, 0, std::move(a)}; }
  static CountFormula disj(std::vector<CountFormula> a) { return {Op::Or, {}, false, 0, std::move(a)}; }
  static CountFormula negate(CountFormula a) { return {Op::Not, {}, false, 0, {std::move(a)}}; }

  bool eval(const std::map<std::string, int>& tag_counts, int data_count) const;
  bool is_positive() const;
  // Tags mentioned in count atoms.
  void collect_tags(std::set<std::string>& out) const;
  int max_constant() const;

  // Disjunctive normal form of a positive formula: each disjunct is a list of atoms.
  std::vector<std::vector<CountFormula>> positive_dnf() const;

  friend bool operator==(const CountFormula&, const CountFormula&) = default;
};

struct Dtd {
  std::set<std::string> root_labels;
  std::map<std::string, CountFormula> rules;

  bool is_positive() const;
  // Cycle in the tag-dependency graph, or empty when non-recursive.
  std::vector<std::string> dependency_cycle() const;
  bool is_non_recursive() const { return dependency_cycle().empty(); }
  int max_constant() const;

  friend bool operator==(const Dtd&, const Dtd&) = default;
};

bool dtd_check(const DataTree& t, const Dtd& d);
// Whether node n's children satisfy the rule for `tag` (true when no rule).
bool dtd_node_ok(const DataTree& t, NodeId n, const std::string& tag, const Dtd& d);
int dtd_depth_bound(const Dtd& d);

// ---------------------------------------------------------------------------
// Graph view: tree nodes plus one vertex per distinct data value.

struct GraphLabel {
  enum class Kind : std::uint8_t { Tag, DataLeaf, Value };

  Kind kind = Kind::Tag;
  std::string tag;
  int depth = 0;

  friend bool operator==(const GraphLabel&, const GraphLabel&) = default;
  friend auto operator<=>(const GraphLabel&, const GraphLabel&) = default;
};

std::string to_string(const GraphLabel& l);

class LabeledGraph {
 public:
  int add_vertex(GraphLabel label);
  void add_edge(int u, int v);

  std::size_t vertex_count() const { return labels_.size(); }
  std::size_t edge_count() const;
  const GraphLabel& label(int v) const { return labels_[v]; }
  std::span<const int> neighbours(int v) const { return adj_[v]; }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  bool adjacent(int u, int v) const;
  bool connected() const;

 private:
  std::vector<GraphLabel> labels_;
  std::vector<std::vector<int>> adj_;  // sorted
};

// Vertices: tree nodes keep their ids, data values follow in ascending order.
// Throws BoundViolation when depth(t) exceeds depth_bound.
LabeledGraph graph_of(const DataTree& t, std::optional<int> depth_bound = std::nullopt);

struct ExecPolicy;
// Exact maximum edge count over all simple paths: pendant trees are measured directly, the
// remaining 2-core is searched exhaustively.
int longest_simple_path(const LabeledGraph& g);
int longest_simple_path(const LabeledGraph& g, const ExecPolicy& policy);

}  // namespace dtprs
