#include "dtprs/canon.hpp"
#include "dtprs/frontend.hpp"

#include <cctype>
#include <sstream>

namespace dtprs {

std::string format_ident(const std::string& name) {
  bool plain = !name.empty();
  for (std::size_t i = 0; i < name.size() && plain; ++i) {
    const auto c = static_cast<unsigned char>(name[i]);
    if (i == 0)
      plain = std::isalpha(c) || c == '_' || c >= 0x80;
    else
      plain = std::isalnum(c) || c == '_' || c == '.' || c == '-' || c >= 0x80;
  }
  if (plain) return name;
  std::string out = "\"";
  for (char c : name) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

namespace {

std::string value(DataValue v) { return "@" + std::to_string(v); }

void raw_tree(const DataTree& t, NodeId n, std::string& out) {
  const auto& l = t.label(n);
  if (l.is_data()) {
    out += value(l.value);
    return;
  }
  out += "[" + format_ident(l.tag) + "]";
  auto ch = t.children(n);
  if (ch.empty()) return;
  out += "(";
  for (std::size_t i = 0; i < ch.size(); ++i) {
    if (i) out += ", ";
    raw_tree(t, ch[i], out);
  }
  out += ")";
}

bool compound_cond(const DataCond& c) { return c.op == DataCond::Op::And || c.op == DataCond::Op::Or; }

std::string print_cond(const DataCond& c) {
  switch (c.op) {
    case DataCond::Op::True: return "";
    case DataCond::Op::Eq: return "$" + c.lhs + " == $" + c.rhs;
    case DataCond::Op::Neq: return "$" + c.lhs + " != $" + c.rhs;
    case DataCond::Op::Not: {
      const auto& a = c.args.front();
      return compound_cond(a) || a.op == DataCond::Op::Eq || a.op == DataCond::Op::Neq ? "!(" + print_cond(a) + ")"
                                                                                          : "!" + print_cond(a);
    }
    case DataCond::Op::And:
    case DataCond::Op::Or: {
      std::string out;
      for (std::size_t i = 0; i < c.args.size(); ++i) {
        if (i) out += c.op == DataCond::Op::And ? " && " : " || ";
        out += compound_cond(c.args[i]) ? "(" + print_cond(c.args[i]) + ")" : print_cond(c.args[i]);
      }
      return out;
    }
  }
  return "";
}

void pattern_node(const TreePattern& p, NodeId n, const Locator* loc, std::string& out) {
  const auto& l = p.label(n);
  std::vector<std::string> ann;
  if (p.self() && *p.self() == n) ann.push_back("self");
  if (loc) {
    // Only the topmost deleted node is written; the parser propagates del downward.
    if (loc->dels.count(n) && !(p.parent(n) != kNoNode && loc->dels.count(p.parent(n)))) ann.push_back("del");
    if (auto it = loc->renames.find(n); it != loc->renames.end()) ann.push_back("ren=" + format_ident(it->second));
    if (auto it = loc->appends.find(n); it != loc->appends.end()) ann.push_back("append=" + it->second);
  }
  std::string annots;
  if (!ann.empty()) {
    annots = "{";
    for (std::size_t i = 0; i < ann.size(); ++i) annots += (i ? ", " : "") + ann[i];
    annots += "}";
  }
  switch (l.kind) {
    case PatternLabel::Kind::Tag: out += "[" + format_ident(l.name) + annots + "]"; break;
    case PatternLabel::Kind::Wildcard: out += "[*" + annots + "]"; break;
    case PatternLabel::Kind::Variable: out += "$" + l.name + annots; return;
    case PatternLabel::Kind::Data: out += value(l.value) + annots; return;
  }
  const auto& ch = p.children(n);
  if (ch.empty()) return;
  out += "(";
  for (std::size_t i = 0; i < ch.size(); ++i) {
    if (i) out += ", ";
    if (p.edge(ch[i]) == Edge::Descendant) out += "-";
    pattern_node(p, ch[i], loc, out);
  }
  out += ")";
}

std::string pattern_text(const TreePattern& p, const Locator* loc) {
  std::string out;
  if (!p.empty()) pattern_node(p, p.root(), loc, out);
  if (!p.cond().is_true()) out += " where " + print_cond(p.cond());
  return out;
}

bool compound(const PatternFormula& f) {
  return f.op == PatternFormula::Op::And || f.op == PatternFormula::Op::Or;
}

// A pattern with a where clause is wrapped so its condition cannot absorb a following operator.
std::string formula_operand(const PatternFormula& f) {
  if (compound(f)) return "(" + print_formula(f) + ")";
  if (f.op == PatternFormula::Op::Atom && !f.atom.cond().is_true()) return "(" + print_formula(f) + ")";
  return print_formula(f);
}

bool compound(const CountFormula& f) { return f.op == CountFormula::Op::And || f.op == CountFormula::Op::Or; }

void template_node(const TemplateTree& t, NodeId n, std::string& out) {
  const auto& l = t.label(n);
  switch (l.kind) {
    case TemplateLabel::Kind::Tag: out += "[" + format_ident(l.name) + "]"; break;
    case TemplateLabel::Kind::Data: out += value(l.value); return;
    case TemplateLabel::Kind::Variable: out += "$" + l.name; return;
    case TemplateLabel::Kind::QueryRef: out += l.name; return;
  }
  const auto& ch = t.children(n);
  if (ch.empty()) return;
  out += "(";
  for (std::size_t i = 0; i < ch.size(); ++i) {
    if (i) out += ", ";
    template_node(t, ch[i], out);
  }
  out += ")";
}

}  // namespace

std::string print_tree(const DataTree& t) { return canonical_print(t); }

std::string print_tree_raw(const DataTree& t) {
  std::string out;
  if (!t.empty()) raw_tree(t, t.root(), out);
  return out;
}

std::string print_pattern(const TreePattern& p) { return pattern_text(p, nullptr); }

std::string print_locator(const Locator& l) { return pattern_text(l.base, &l); }

std::string print_formula(const PatternFormula& f) {
  switch (f.op) {
    case PatternFormula::Op::True: return "true";
    case PatternFormula::Op::False: return "false";
    case PatternFormula::Op::Atom: return print_pattern(f.atom);
    case PatternFormula::Op::Not: return "!" + formula_operand(f.args.front());
    case PatternFormula::Op::And:
    case PatternFormula::Op::Or: {
      std::string out;
      for (std::size_t i = 0; i < f.args.size(); ++i) {
        if (i) out += f.op == PatternFormula::Op::And ? " && " : " || ";
        out += formula_operand(f.args[i]);
      }
      return out;
    }
  }
  return "";
}

std::string print_count_formula(const CountFormula& f) {
  switch (f.op) {
    case CountFormula::Op::True: return "true";
    case CountFormula::Op::False: return "false";
    case CountFormula::Op::Atom: {
      const std::string sym = f.dom ? "dom" : (f.symbol == "dom" ? "\"dom\"" : format_ident(f.symbol));
      return "|" + sym + "| >= " + std::to_string(f.at_least);
    }
    case CountFormula::Op::Not: {
      const auto& a = f.args.front();
      return compound(a) ? "!(" + print_count_formula(a) + ")" : "!" + print_count_formula(a);
    }
    case CountFormula::Op::And:
    case CountFormula::Op::Or: {
      std::string out;
      for (std::size_t i = 0; i < f.args.size(); ++i) {
        if (i) out += f.op == CountFormula::Op::And ? " && " : " || ";
        out += compound(f.args[i]) ? "(" + print_count_formula(f.args[i]) + ")" : print_count_formula(f.args[i]);
      }
      return out;
    }
  }
  return "";
}

std::string print_template(const TemplateTree& t) {
  std::string out;
  if (t.size()) template_node(t, t.root(), out);
  return out;
}

std::string print_rule(const Rule& r) {
  std::ostringstream os;
  os << "  rule " << format_ident(r.name) << " {\n";
  os << "    locator: " << print_locator(r.locator) << ";\n";
  if (!r.guard.is_true()) os << "    guard: " << print_formula(r.guard) << ";\n";
  for (const auto& [name, q] : r.queries)
    os << "    query " << name << ": " << print_pattern(q.body) << " ~> " << print_template(q.head) << ";\n";
  for (const auto& [name, f] : r.forests) {
    os << "    forest " << name << ":";
    for (std::size_t i = 0; i < f.size(); ++i) os << (i ? ", " : " ") << print_template(f[i]);
    os << ";\n";
  }
  os << "  }\n";
  return os.str();
}

std::string print_system(const System& s) {
  std::ostringstream os;
  os << "system " << format_ident(s.name) << " {\n";
  os << "  alphabet {";
  for (std::size_t i = 0; i < s.alphabet.size(); ++i) os << (i ? ", " : " ") << format_ident(s.alphabet[i]);
  os << " }\n";
  os << "  dtd {\n    root:";
  {
    std::size_t i = 0;
    for (const auto& r : s.dtd.root_labels) os << (i++ ? ", " : " ") << format_ident(r);
  }
  os << ";\n";
  for (const auto& [tag, f] : s.dtd.rules) os << "    " << format_ident(tag) << " -> " << print_count_formula(f) << ";\n";
  os << "  }\n";
  if (!s.invariant.is_true()) os << "  invariant: " << print_formula(s.invariant) << ";\n";
  os << "  bounds { depth: " << s.depth_bound << "; simple-path: ";
  if (s.path_bound)
    os << *s.path_bound;
  else
    os << "none";
  os << "; }\n";
  if (s.init.symbolic) {
    os << "  init symbolic { formula: " << print_formula(s.init.symbolic->formula) << "; cap: " << s.init.symbolic->cap
       << "; }\n";
  } else {
    os << "  init {\n";
    for (const auto& t : s.init.trees) os << "    " << print_tree_raw(t) << ";\n";
    os << "  }\n";
  }
  for (const auto& r : s.rules) os << print_rule(r);
  os << "}\n";
  return os.str();
}

}  // namespace dtprs
