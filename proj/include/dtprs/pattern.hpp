#pragma once

#include "dtprs/tree.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dtprs {

using Valuation = std::map<std::string, DataValue>;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PatternLabel {
  enum class Kind : std::uint8_t { Tag, Wildcard, Variable, Data };

  Kind kind = Kind::Tag;
  std::string name;  // tag or variable name
  DataValue value = 0;

  static PatternLabel tag(std::string t) { return {Kind::Tag, std::move(t), 0}; }
  static PatternLabel wildcard() { return {Kind::Wildcard, {}, 0}; }
  static PatternLabel variable(std::string v) { return {Kind::Variable, std::move(v), 0}; }
  static PatternLabel data(DataValue v) { return {Kind::Data, {}, v}; }

  bool is_tag_like() const { return kind == Kind::Tag || kind == Kind::Wildcard; }
  friend bool operator==(const PatternLabel&, const PatternLabel&) = default;
};

enum class Edge : std::uint8_t { Child, Descendant };

// Boolean constraint over variable (in)equalities.
struct DataCond {
  enum class Op : std::uint8_t { True, Eq, Neq, And, Or, Not };

  Op op = Op::True;
  std::string lhs, rhs;
  std::vector<DataCond> args;

  static DataCond truth() { return {}; }
  static DataCond eq(std::string a, std::string b) { return {Op::Eq, std::move(a), std::move(b), {}}; }
  static DataCond neq(std::string a, std::string b) { return {Op::Neq, std::move(a), std::move(b), {}}; }
  static DataCond conj(std::vector<DataCond> a) { return {Op::And, {}, {}, std::move(a)}; }
  static DataCond disj(std::vector<DataCond> a) { return {Op::Or, {}, {}, std::move(a)}; }
  static DataCond negate(DataCond a) { return {Op::Not, {}, {}, {std::move(a)}}; }

  bool is_true() const { return op == Op::True; }
  bool eval(const Valuation& v) const;
  void collect_vars(std::set<std::string>& out) const;

  friend bool operator==(const DataCond&, const DataCond&) = default;
};

class TreePattern {
 public:
  TreePattern() = default;
  explicit TreePattern(PatternLabel root) { nodes_.push_back(Node{std::move(root), kNoNode, Edge::Child, {}}); }

  NodeId add_child(NodeId parent, PatternLabel label, Edge edge = Edge::Child);

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  NodeId root() const { return 0; }
  const PatternLabel& label(NodeId n) const { return nodes_[n].label; }
  PatternLabel& label(NodeId n) { return nodes_[n].label; }
  NodeId parent(NodeId n) const { return nodes_[n].parent; }
  Edge edge(NodeId n) const { return nodes_[n].edge; }
  const std::vector<NodeId>& children(NodeId n) const { return nodes_[n].children; }
  std::vector<NodeId> preorder() const;
  // Node ids in the subtree rooted at n (n first, preorder).
  std::vector<NodeId> subtree(NodeId n) const;

  std::optional<NodeId> self() const { return self_; }
  void set_self(std::optional<NodeId> n) { self_ = n; }
  bool is_relative() const { return self_.has_value(); }

  const DataCond& cond() const { return cond_; }
  void set_cond(DataCond c) { cond_ = std::move(c); }

  // Variable names at leaves, ascending.
  std::set<std::string> variables() const;

  friend bool operator==(const TreePattern&, const TreePattern&) = default;

 private:
  struct Node {
    PatternLabel label;
    NodeId parent = kNoNode;
    Edge edge = Edge::Child;
    std::vector<NodeId> children;
    friend bool operator==(const Node&, const Node&) = default;
  };
  std::vector<Node> nodes_;
  std::optional<NodeId> self_;
  DataCond cond_;
};

// Throws UsageError when internal nodes carry variables/data or cond names unknown variables.
void check_pattern(const TreePattern& p);

struct PatternFormula {
  enum class Op : std::uint8_t { True, False, Atom, And, Or, Not };

  Op op = Op::True;
  TreePattern atom;
  std::vector<PatternFormula> args;

  static PatternFormula truth() { return {}; }
  static PatternFormula falsity() { return {Op::False, {}, {}}; }
  static PatternFormula of(TreePattern p) { return {Op::Atom, std::move(p), {}}; }
  static PatternFormula conj(std::vector<PatternFormula> a) { return {Op::And, {}, std::move(a)}; }
  static PatternFormula disj(std::vector<PatternFormula> a) { return {Op::Or, {}, std::move(a)}; }
  static PatternFormula negate(PatternFormula a) { return {Op::Not, {}, {std::move(a)}}; }

  bool is_true() const { return op == Op::True; }
  bool is_positive() const;
  bool has_relative() const;
  void collect_atoms(std::vector<const TreePattern*>& out) const;
  // DNF of a positive formula; each disjunct lists the patterns that must all match.
  std::vector<std::vector<TreePattern>> positive_dnf() const;

  friend bool operator==(const PatternFormula&, const PatternFormula&) = default;
};

// Templates for query heads and forests. QueryRef leaves expand to a query's result forest.
struct TemplateLabel {
  enum class Kind : std::uint8_t { Tag, Data, Variable, QueryRef };

  Kind kind = Kind::Tag;
  std::string name;
  DataValue value = 0;

  static TemplateLabel tag(std::string t) { return {Kind::Tag, std::move(t), 0}; }
  static TemplateLabel data(DataValue v) { return {Kind::Data, {}, v}; }
  static TemplateLabel variable(std::string v) { return {Kind::Variable, std::move(v), 0}; }
  static TemplateLabel query(std::string q) { return {Kind::QueryRef, std::move(q), 0}; }

  friend bool operator==(const TemplateLabel&, const TemplateLabel&) = default;
};

class TemplateTree {
 public:
  TemplateTree() = default;
  explicit TemplateTree(TemplateLabel root) { nodes_.push_back(Node{std::move(root), kNoNode, {}}); }

  NodeId add_child(NodeId parent, TemplateLabel label);
  std::size_t size() const { return nodes_.size(); }
  NodeId root() const { return 0; }
  const TemplateLabel& label(NodeId n) const { return nodes_[n].label; }
  NodeId parent(NodeId n) const { return nodes_[n].parent; }
  const std::vector<NodeId>& children(NodeId n) const { return nodes_[n].children; }

  void collect_vars(std::set<std::string>& out) const;
  void collect_queries(std::set<std::string>& out) const;

  friend bool operator==(const TemplateTree&, const TemplateTree&) = default;

 private:
  struct Node {
    TemplateLabel label;
    NodeId parent = kNoNode;
    std::vector<NodeId> children;
    friend bool operator==(const Node&, const Node&) = default;
  };
  std::vector<Node> nodes_;
};

using Forest = std::vector<TemplateTree>;

struct Query {
  TreePattern body;
  TemplateTree head;
  friend bool operator==(const Query&, const Query&) = default;
};

struct Matching {
  std::vector<NodeId> image;  // indexed by pattern node
  Valuation valuation;
  friend bool operator==(const Matching&, const Matching&) = default;
};

// Visits matchings in the deterministic enumeration order; stop by returning false.
void for_each_matching(const TreePattern& p, const DataTree& t, std::optional<NodeId> anchor, bool injective,
                       const std::function<bool(const Matching&)>& visit);

std::vector<Matching> match_all(const TreePattern& p, const DataTree& t, std::optional<NodeId> anchor = {});
std::vector<Matching> match_injective(const TreePattern& p, const DataTree& t, std::optional<NodeId> anchor = {});
bool matches_any(const TreePattern& p, const DataTree& t, std::optional<NodeId> anchor = {});

bool eval_formula(const PatternFormula& f, const DataTree& t, std::optional<NodeId> anchor = {});

// Instantiates a template; QueryRef leaves pull trees from `results` (absent name -> nothing).
std::vector<DataTree> instantiate(const TemplateTree& tpl, const Valuation& v,
                                  const std::map<std::string, std::vector<DataTree>>& results = {});

// Distinct instantiations of the head, in first-match order.
std::vector<DataTree> eval_query(const Query& q, const DataTree& t, NodeId anchor);

}  // namespace dtprs
