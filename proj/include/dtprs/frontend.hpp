#pragma once

#include "dtprs/pattern.hpp"
#include "dtprs/rewrite.hpp"
#include "dtprs/tree.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace dtprs {

// Diagnostic codes, one per error class.
enum class DiagCode {
  Lexical = 1,         // bad character, unterminated string
  Syntax = 2,          // unexpected token
  UnknownTag = 3,      // tag outside the declared alphabet
  UndefinedForest = 4, // append= names no forest of the rule
  HeadVariable = 5,    // query head variable absent from the body, or no head variable
  DelConflict = 6,     // ren/append at or below a deleted node
  NonLeafVariable = 7, // variable or data node with children
  UndefinedQuery = 8,  // forest leaf names no query of the rule
  Duplicate = 9,       // repeated rule/query/forest name or repeated self
  Bounds = 10,         // malformed or missing bounds
  TreeSyntax = 11,     // variables, wildcards or annotations inside a data tree
  CondVariable = 12,   // where-clause names a variable absent from the pattern
  Annotation = 13,     // annotation not allowed in this position
};

std::string diag_code_name(DiagCode c);

class ParseError : public std::runtime_error {
 public:
  ParseError(DiagCode code, int line, int col, const std::string& msg);
  DiagCode code() const { return code_; }
  int line() const { return line_; }
  int column() const { return col_; }

 private:
  DiagCode code_;
  int line_, col_;
};

DataTree parse_tree(std::string_view text);
TreePattern parse_pattern(std::string_view text);
System parse_system(std::string_view text);

// Quotes names that are not plain identifiers.
std::string format_ident(const std::string& name);

// Canonical form: sorted children, values renumbered by first occurrence.
std::string print_tree(const DataTree& t);
// Storage order and actual values; parse_tree(print_tree_raw(t)) == t.
std::string print_tree_raw(const DataTree& t);
std::string print_pattern(const TreePattern& p);
std::string print_formula(const PatternFormula& f);
std::string print_count_formula(const CountFormula& f);
std::string print_template(const TemplateTree& t);
std::string print_locator(const Locator& l);
std::string print_rule(const Rule& r);
std::string print_system(const System& s);

}  // namespace dtprs
