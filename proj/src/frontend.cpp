#include "dtprs/frontend.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace dtprs {

std::string diag_code_name(DiagCode c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "E%03d", static_cast<int>(c));
  return buf;
}

ParseError::ParseError(DiagCode code, int line, int col, const std::string& msg)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": error " + diag_code_name(code) +
                         ": " + msg),
      code_(code),
      line_(line),
      col_(col) {}

namespace {

enum class Tok {
  Ident, String, Int, At, Dollar, LBrack, RBrack, LParen, RParen, LBrace, RBrace,
  Comma, Semi, Colon, Minus, Arrow, Squiggle, Assign, EqEq, NotEq, Bang, AndAnd, OrOr,
  Pipe, Ge, Star, End
};

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '.' || c >= 0x80; }

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < s.size(); ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto next_is = [&](std::size_t off, char c) { return i + off < s.size() && s[i + off] == c; };
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    const int tl = line, tc = col;
    auto push = [&](Tok k, std::size_t len) {
      out.push_back(Token{k, std::string(s.substr(i, len)), tl, tc});
      advance(len);
    };
    if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < s.size()) {
        const unsigned char d = static_cast<unsigned char>(s[j]);
        if (ident_char(d)) {
          ++j;
        } else if (d == '-' && !(j + 1 < s.size() && (s[j + 1] == '>' || s[j + 1] == '['))) {
          ++j;
        } else {
          break;
        }
      }
      push(Tok::Ident, j - i);
      continue;
    }
    if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      push(Tok::Int, j - i);
      continue;
    }
    if (c == '"') {
      std::string text;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < s.size()) {
        if (s[j] == '\\' && j + 1 < s.size()) {
          text += s[j + 1];
          j += 2;
        } else if (s[j] == '"') {
          closed = true;
          ++j;
          break;
        } else if (s[j] == '\n') {
          break;
        } else {
          text += s[j++];
        }
      }
      if (!closed) throw ParseError(DiagCode::Lexical, tl, tc, "unterminated string");
      out.push_back(Token{Tok::String, text, tl, tc});
      advance(j - i);
      continue;
    }
    switch (c) {
      case '@': push(Tok::At, 1); continue;
      case '$': push(Tok::Dollar, 1); continue;
      case '[': push(Tok::LBrack, 1); continue;
      case ']': push(Tok::RBrack, 1); continue;
      case '(': push(Tok::LParen, 1); continue;
      case ')': push(Tok::RParen, 1); continue;
      case '{': push(Tok::LBrace, 1); continue;
      case '}': push(Tok::RBrace, 1); continue;
      case ',': push(Tok::Comma, 1); continue;
      case ';': push(Tok::Semi, 1); continue;
      case ':': push(Tok::Colon, 1); continue;
      case '*': push(Tok::Star, 1); continue;
      case '-': push(next_is(1, '>') ? Tok::Arrow : Tok::Minus, next_is(1, '>') ? 2 : 1); continue;
      case '~':
        if (next_is(1, '>')) {
          push(Tok::Squiggle, 2);
          continue;
        }
        break;
      case '=': push(next_is(1, '=') ? Tok::EqEq : Tok::Assign, next_is(1, '=') ? 2 : 1); continue;
      case '!': push(next_is(1, '=') ? Tok::NotEq : Tok::Bang, next_is(1, '=') ? 2 : 1); continue;
      case '&':
        if (next_is(1, '&')) {
          push(Tok::AndAnd, 2);
          continue;
        }
        break;
      case '|': push(next_is(1, '|') ? Tok::OrOr : Tok::Pipe, next_is(1, '|') ? 2 : 1); continue;
      case '>':
        if (next_is(1, '=')) {
          push(Tok::Ge, 2);
          continue;
        }
        break;
      default: break;
    }
    throw ParseError(DiagCode::Lexical, tl, tc, std::string("unexpected character '") + static_cast<char>(c) + "'");
  }
  out.push_back(Token{Tok::End, "", line, col});
  return out;
}

const char* tok_name(Tok k) {
  switch (k) {
    case Tok::Ident: return "identifier";
    case Tok::String: return "string";
    case Tok::Int: return "integer";
    case Tok::At: return "'@'";
    case Tok::Dollar: return "'$'";
    case Tok::LBrack: return "'['";
    case Tok::RBrack: return "']'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Minus: return "'-'";
    case Tok::Arrow: return "'->'";
    case Tok::Squiggle: return "'~>'";
    case Tok::Assign: return "'='";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'!='";
    case Tok::Bang: return "'!'";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Pipe: return "'|'";
    case Tok::Ge: return "'>='";
    case Tok::Star: return "'*'";
    case Tok::End: return "end of input";
  }
  return "?";
}

// Locator annotations collected while parsing a pattern.
struct Annotations {
  Locator* loc = nullptr;
  std::map<NodeId, Token> append_tokens;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {
    DataValue max_explicit = 0;
    bool any = false;
    for (std::size_t i = 0; i + 1 < toks_.size(); ++i)
      if (toks_[i].kind == Tok::At && toks_[i + 1].kind == Tok::Int) {
        max_explicit = std::max(max_explicit, to_value(toks_[i + 1]));
        any = true;
      }
    next_string_value_ = any ? max_explicit + 1 : 0;
  }

  DataTree tree_file() {
    DataTree t = tree();
    expect(Tok::End, "end of input");
    return t;
  }

  TreePattern pattern_file() {
    TreePattern p = pattern(nullptr);
    expect(Tok::End, "end of input");
    return p;
  }

  System system_file() {
    System s = system();
    expect(Tok::End, "end of input");
    return s;
  }

 private:
  // --- token helpers -------------------------------------------------------
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_word(const char* w) const { return peek().kind == Tok::Ident && peek().text == w; }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(DiagCode code, const Token& t, const std::string& msg) const {
    throw ParseError(code, t.line, t.col, msg);
  }
  [[noreturn]] void unexpected(const std::string& wanted) const {
    const Token& t = peek();
    std::string got = tok_name(t.kind);
    if (t.kind == Tok::Ident || t.kind == Tok::Int) got += " '" + t.text + "'";
    fail(DiagCode::Syntax, t, "expected " + wanted + ", found " + got);
  }
  Token expect(Tok k, const std::string& what) {
    if (!at(k)) unexpected(what);
    return take();
  }
  void expect_word(const char* w) {
    if (!at_word(w)) unexpected(std::string("'") + w + "'");
    take();
  }
  bool accept(Tok k) {
    if (!at(k)) return false;
    take();
    return true;
  }

  DataValue to_value(const Token& t) const {
    try {
      const unsigned long v = std::stoul(t.text);
      if (v > 0xffffffffUL) throw std::out_of_range("");
      return static_cast<DataValue>(v);
    } catch (const std::exception&) {
      fail(DiagCode::Syntax, t, "data value out of range");
    }
  }
  int to_int(const Token& t) const {
    try {
      return std::stoi(t.text);
    } catch (const std::exception&) {
      fail(DiagCode::Syntax, t, "integer out of range");
    }
  }

  DataValue intern(const std::string& s) {
    auto it = strings_.find(s);
    if (it != strings_.end()) return it->second;
    return strings_[s] = next_string_value_++;
  }

  // Tag names: identifiers or quoted strings.
  Token name(const std::string& what) {
    if (at(Tok::Ident) || at(Tok::String)) return take();
    unexpected(what);
  }
  Token tag_name() {
    Token t = name("tag name");
    check_tag(t);
    return t;
  }
  void check_tag(const Token& t) const {
    if (alphabet_ && !alphabet_->count(t.text)) fail(DiagCode::UnknownTag, t, "tag '" + t.text + "' is not in the alphabet");
  }

  // --- trees ---------------------------------------------------------------
  DataTree tree() {
    if (at(Tok::At)) {
      take();
      return DataTree(Label::make_data(to_value(expect(Tok::Int, "integer"))));
    }
    if (at(Tok::String)) return DataTree(Label::make_data(intern(take().text)));
    expect(Tok::LBrack, "'['");
    if (at(Tok::Star)) fail(DiagCode::TreeSyntax, peek(), "wildcards are not allowed in data trees");
    DataTree t = DataTree::with_root_tag(tag_name().text);
    if (at(Tok::LBrace)) fail(DiagCode::TreeSyntax, peek(), "annotations are not allowed in data trees");
    expect(Tok::RBrack, "']'");
    tree_children(t, t.root());
    return t;
  }

  void tree_children(DataTree& t, NodeId parent) {
    if (!accept(Tok::LParen)) return;
    if (accept(Tok::RParen)) return;
    do {
      tree_node(t, parent);
    } while (accept(Tok::Comma));
    expect(Tok::RParen, "',' or ')'");
  }

  void tree_node(DataTree& t, NodeId parent) {
    switch (peek().kind) {
      case Tok::At: {
        take();
        t.add_data(parent, to_value(expect(Tok::Int, "integer")));
        return;
      }
      case Tok::String: t.add_data(parent, intern(take().text)); return;
      case Tok::LBrack: {
        take();
        if (at(Tok::Star)) fail(DiagCode::TreeSyntax, peek(), "wildcards are not allowed in data trees");
        const NodeId n = t.add_tag(parent, tag_name().text);
        if (at(Tok::LBrace)) fail(DiagCode::TreeSyntax, peek(), "annotations are not allowed in data trees");
        expect(Tok::RBrack, "']'");
        tree_children(t, n);
        return;
      }
      case Tok::Dollar: fail(DiagCode::TreeSyntax, peek(), "variables are not allowed in data trees");
      case Tok::Minus: fail(DiagCode::TreeSyntax, peek(), "descendant edges are not allowed in data trees");
      default: unexpected("tree node");
    }
  }

  // --- patterns ------------------------------------------------------------
  TreePattern pattern(Annotations* ann) {
    TreePattern p;
    node_tokens_.clear();
    pattern_node(p, kNoNode, Edge::Child, ann);
    if (at_word("where")) {
      const Token w = take();
      DataCond c = cond_or();
      std::set<std::string> used;
      c.collect_vars(used);
      auto vars = p.variables();
      for (const auto& v : used)
        if (!vars.count(v)) fail(DiagCode::CondVariable, w, "condition mentions $" + v + " which the pattern lacks");
      p.set_cond(std::move(c));
    }
    if (ann) propagate_del(p, *ann);
    return p;
  }

  void pattern_node(TreePattern& p, NodeId parent, Edge edge, Annotations* ann) {
    const Token start = peek();
    PatternLabel label;
    bool tag_like = false;
    if (accept(Tok::LBrack)) {
      if (accept(Tok::Star)) {
        label = PatternLabel::wildcard();
      } else {
        label = PatternLabel::tag(tag_name().text);
      }
      tag_like = true;
    } else if (accept(Tok::Dollar)) {
      label = PatternLabel::variable(expect(Tok::Ident, "variable name").text);
    } else if (accept(Tok::At)) {
      label = PatternLabel::data(to_value(expect(Tok::Int, "integer")));
    } else {
      unexpected("pattern node");
    }
    NodeId n;
    if (parent == kNoNode) {
      p = TreePattern(label);
      n = p.root();
    } else {
      n = p.add_child(parent, label, edge);
    }
    node_tokens_.push_back(start);
    if (at(Tok::LBrace)) annotations(p, n, tag_like, ann);
    if (tag_like) {
      expect(Tok::RBrack, "']'");
      if (accept(Tok::LParen)) {
        if (!accept(Tok::RParen)) {
          do {
            const Edge e = accept(Tok::Minus) ? Edge::Descendant : Edge::Child;
            pattern_node(p, n, e, ann);
          } while (accept(Tok::Comma));
          expect(Tok::RParen, "',' or ')'");
        }
      }
    } else if (at(Tok::LParen)) {
      fail(DiagCode::NonLeafVariable, peek(), "variable and data nodes must be leaves");
    }
  }

  void annotations(TreePattern& p, NodeId n, bool tag_like, Annotations* ann) {
    take();
    do {
      const Token a = expect(Tok::Ident, "annotation");
      if (a.text == "self") {
        if (p.self()) fail(DiagCode::Duplicate, a, "pattern already has a self node");
        p.set_self(n);
      } else if (a.text == "del") {
        if (!ann) fail(DiagCode::Annotation, a, "del is only allowed in locators");
        ann->loc->dels.insert(n);
      } else if (a.text == "ren") {
        if (!ann) fail(DiagCode::Annotation, a, "ren is only allowed in locators");
        if (!tag_like) fail(DiagCode::Annotation, a, "ren needs a tag node");
        expect(Tok::Assign, "'='");
        ann->loc->renames[n] = tag_name().text;
      } else if (a.text == "append") {
        if (!ann) fail(DiagCode::Annotation, a, "append is only allowed in locators");
        if (!tag_like) fail(DiagCode::Annotation, a, "append needs a tag node");
        expect(Tok::Assign, "'='");
        const Token f = expect(Tok::Ident, "forest name");
        ann->loc->appends[n] = f.text;
        ann->append_tokens.emplace(n, f);
      } else {
        fail(DiagCode::Annotation, a, "unknown annotation '" + a.text + "'");
      }
    } while (accept(Tok::Comma));
    expect(Tok::RBrace, "',' or '}'");
  }

  // Deletion covers whole subtrees; renaming or appending inside them is contradictory.
  void propagate_del(const TreePattern& p, Annotations& ann) {
    auto& loc = *ann.loc;
    std::set<NodeId> all;
    for (NodeId d : loc.dels)
      for (NodeId x : p.subtree(d)) all.insert(x);
    for (NodeId x : all)
      if (loc.renames.count(x) || loc.appends.count(x))
        fail(DiagCode::DelConflict, node_tokens_[x], "ren/append on a node that is deleted");
    loc.dels = std::move(all);
  }

  bool cond_continues() const {
    std::size_t k = 1;
    while (peek(k).kind == Tok::Bang || peek(k).kind == Tok::LParen) ++k;
    return peek(k).kind == Tok::Dollar;
  }

  DataCond cond_or() {
    std::vector<DataCond> parts{cond_and()};
    while (at(Tok::OrOr) && cond_continues()) {
      take();
      parts.push_back(cond_and());
    }
    return parts.size() == 1 ? std::move(parts[0]) : DataCond::disj(std::move(parts));
  }

  DataCond cond_and() {
    std::vector<DataCond> parts{cond_unary()};
    while (at(Tok::AndAnd) && cond_continues()) {
      take();
      parts.push_back(cond_unary());
    }
    return parts.size() == 1 ? std::move(parts[0]) : DataCond::conj(std::move(parts));
  }

  DataCond cond_unary() {
    if (accept(Tok::Bang)) return DataCond::negate(cond_unary());
    if (accept(Tok::LParen)) {
      DataCond c = cond_or();
      expect(Tok::RParen, "')'");
      return c;
    }
    expect(Tok::Dollar, "'$'");
    std::string a = expect(Tok::Ident, "variable name").text;
    const bool eq = at(Tok::EqEq);
    if (!eq && !at(Tok::NotEq)) unexpected("'==' or '!='");
    take();
    expect(Tok::Dollar, "'$'");
    std::string b = expect(Tok::Ident, "variable name").text;
    return eq ? DataCond::eq(std::move(a), std::move(b)) : DataCond::neq(std::move(a), std::move(b));
  }

  // --- formulas ------------------------------------------------------------
  PatternFormula formula() {
    std::vector<PatternFormula> parts{formula_and()};
    while (accept(Tok::OrOr)) parts.push_back(formula_and());
    return parts.size() == 1 ? std::move(parts[0]) : PatternFormula::disj(std::move(parts));
  }

  PatternFormula formula_and() {
    std::vector<PatternFormula> parts{formula_unary()};
    while (accept(Tok::AndAnd)) parts.push_back(formula_unary());
    return parts.size() == 1 ? std::move(parts[0]) : PatternFormula::conj(std::move(parts));
  }

  PatternFormula formula_unary() {
    if (accept(Tok::Bang)) return PatternFormula::negate(formula_unary());
    if (accept(Tok::LParen)) {
      PatternFormula f = formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (at_word("true")) {
      take();
      return PatternFormula::truth();
    }
    if (at_word("false")) {
      take();
      return PatternFormula::falsity();
    }
    if (!at(Tok::LBrack)) unexpected("pattern, 'true', 'false', '!' or '('");
    return PatternFormula::of(pattern(nullptr));
  }

  CountFormula count_formula() {
    std::vector<CountFormula> parts{count_and()};
    while (accept(Tok::OrOr)) parts.push_back(count_and());
    return parts.size() == 1 ? std::move(parts[0]) : CountFormula::disj(std::move(parts));
  }

  CountFormula count_and() {
    std::vector<CountFormula> parts{count_unary()};
    while (accept(Tok::AndAnd)) parts.push_back(count_unary());
    return parts.size() == 1 ? std::move(parts[0]) : CountFormula::conj(std::move(parts));
  }

  CountFormula count_unary() {
    if (accept(Tok::Bang)) return CountFormula::negate(count_unary());
    if (accept(Tok::LParen)) {
      CountFormula f = count_formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (at_word("true")) {
      take();
      return CountFormula::truth();
    }
    if (at_word("false")) {
      take();
      return CountFormula::falsity();
    }
    expect(Tok::Pipe, "'|', 'true', 'false', '!' or '('");
    const Token sym = name("tag name or dom");
    const bool dom = sym.kind == Tok::Ident && sym.text == "dom";
    if (!dom) check_tag(sym);
    expect(Tok::Pipe, "'|'");
    expect(Tok::Ge, "'>='");
    const int k = to_int(expect(Tok::Int, "integer"));
    return dom ? CountFormula::dom_atom(k) : CountFormula::tag_atom(sym.text, k);
  }

  // --- templates -----------------------------------------------------------
  TemplateTree template_tree() {
    TemplateTree t;
    template_node(t, kNoNode);
    return t;
  }

  void template_node(TemplateTree& t, NodeId parent) {
    TemplateLabel label;
    bool tag = false;
    if (accept(Tok::LBrack)) {
      label = TemplateLabel::tag(tag_name().text);
      expect(Tok::RBrack, "']'");
      tag = true;
    } else if (accept(Tok::Dollar)) {
      label = TemplateLabel::variable(expect(Tok::Ident, "variable name").text);
    } else if (accept(Tok::At)) {
      label = TemplateLabel::data(to_value(expect(Tok::Int, "integer")));
    } else if (at(Tok::String)) {
      label = TemplateLabel::data(intern(take().text));
    } else if (at(Tok::Ident)) {
      const Token q = take();
      label = TemplateLabel::query(q.text);
      query_refs_.push_back(q);
    } else {
      unexpected("forest node");
    }
    NodeId n;
    if (parent == kNoNode) {
      t = TemplateTree(label);
      n = t.root();
    } else {
      n = t.add_child(parent, label);
    }
    if (tag && accept(Tok::LParen)) {
      if (accept(Tok::RParen)) return;
      do {
        template_node(t, n);
      } while (accept(Tok::Comma));
      expect(Tok::RParen, "',' or ')'");
    } else if (!tag && at(Tok::LParen)) {
      fail(DiagCode::NonLeafVariable, peek(), "only tag nodes can have children");
    }
  }

  // --- systems -------------------------------------------------------------
  System system() {
    System s;
    expect_word("system");
    s.name = name("system name").text;
    expect(Tok::LBrace, "'{'");

    expect_word("alphabet");
    expect(Tok::LBrace, "'{'");
    std::set<std::string> alpha;
    if (!at(Tok::RBrace)) {
      do {
        if (at(Tok::RBrace)) break;
        const Token t = name("tag name");
        if (!alpha.insert(t.text).second) fail(DiagCode::Duplicate, t, "tag '" + t.text + "' declared twice");
        s.alphabet.push_back(t.text);
      } while (accept(Tok::Comma));
    }
    expect(Tok::RBrace, "',' or '}'");
    alphabet_ = &alpha;

    expect_word("dtd");
    expect(Tok::LBrace, "'{'");
    expect_word("root");
    expect(Tok::Colon, "':'");
    do {
      s.dtd.root_labels.insert(tag_name().text);
    } while (accept(Tok::Comma));
    expect(Tok::Semi, "';'");
    while (!at(Tok::RBrace)) {
      const Token t = tag_name();
      if (s.dtd.rules.count(t.text)) fail(DiagCode::Duplicate, t, "second DTD rule for '" + t.text + "'");
      expect(Tok::Arrow, "'->'");
      s.dtd.rules[t.text] = count_formula();
      expect(Tok::Semi, "';'");
    }
    take();

    if (at_word("invariant")) {
      take();
      expect(Tok::Colon, "':'");
      s.invariant = formula();
      expect(Tok::Semi, "';'");
    }

    if (!at_word("bounds")) fail(DiagCode::Bounds, peek(), "missing bounds section");
    take();
    expect(Tok::LBrace, "'{'");
    expect_word("depth");
    expect(Tok::Colon, "':'");
    {
      const Token d = expect(Tok::Int, "integer");
      s.depth_bound = to_int(d);
      if (s.depth_bound < 1) fail(DiagCode::Bounds, d, "depth bound must be positive");
    }
    expect(Tok::Semi, "';'");
    expect_word("simple-path");
    expect(Tok::Colon, "':'");
    if (at_word("none")) {
      take();
    } else {
      const Token k = expect(Tok::Int, "integer or 'none'");
      s.path_bound = to_int(k);
      if (*s.path_bound < 0) fail(DiagCode::Bounds, k, "simple-path bound must be non-negative");
    }
    expect(Tok::Semi, "';'");
    expect(Tok::RBrace, "'}'");

    expect_word("init");
    if (at_word("symbolic")) {
      take();
      expect(Tok::LBrace, "'{'");
      SymbolicInit si;
      expect_word("formula");
      expect(Tok::Colon, "':'");
      si.formula = formula();
      expect(Tok::Semi, "';'");
      expect_word("cap");
      expect(Tok::Colon, "':'");
      si.cap = to_int(expect(Tok::Int, "integer"));
      expect(Tok::Semi, "';'");
      expect(Tok::RBrace, "'}'");
      s.init.symbolic = std::move(si);
    } else {
      expect(Tok::LBrace, "'{'");
      while (!at(Tok::RBrace)) {
        s.init.trees.push_back(tree());
        expect(Tok::Semi, "';'");
      }
      take();
    }

    std::set<std::string> rule_names;
    while (at_word("rule")) {
      take();
      const Token rn = name("rule name");
      if (!rule_names.insert(rn.text).second) fail(DiagCode::Duplicate, rn, "rule '" + rn.text + "' defined twice");
      s.rules.push_back(rule(rn));
    }
    expect(Tok::RBrace, "'rule' or '}'");
    alphabet_ = nullptr;
    return s;
  }

  Rule rule(const Token& name_tok) {
    Rule r;
    r.name = name_tok.text;
    expect(Tok::LBrace, "'{'");
    expect_word("locator");
    expect(Tok::Colon, "':'");
    Annotations ann;
    ann.loc = &r.locator;
    r.locator.base = pattern(&ann);
    expect(Tok::Semi, "';'");
    if (at_word("guard")) {
      take();
      expect(Tok::Colon, "':'");
      r.guard = formula();
      expect(Tok::Semi, "';'");
    }
    while (at_word("query")) {
      take();
      const Token qn = expect(Tok::Ident, "query name");
      if (r.query(qn.text)) fail(DiagCode::Duplicate, qn, "query '" + qn.text + "' defined twice");
      expect(Tok::Colon, "':'");
      Query q;
      q.body = pattern(nullptr);
      expect(Tok::Squiggle, "'~>'");
      q.head = template_tree();
      std::set<std::string> head_vars;
      q.head.collect_vars(head_vars);
      if (head_vars.empty()) fail(DiagCode::HeadVariable, qn, "query head has no variable");
      auto body_vars = q.body.variables();
      for (const auto& v : head_vars)
        if (!body_vars.count(v)) fail(DiagCode::HeadVariable, qn, "head variable $" + v + " absent from the body");
      expect(Tok::Semi, "';'");
      r.queries.emplace_back(qn.text, std::move(q));
    }
    while (at_word("forest")) {
      take();
      const Token fn = expect(Tok::Ident, "forest name");
      if (r.forest(fn.text)) fail(DiagCode::Duplicate, fn, "forest '" + fn.text + "' defined twice");
      expect(Tok::Colon, "':'");
      Forest f;
      if (!at(Tok::Semi)) {
        do {
          f.push_back(template_tree());
        } while (accept(Tok::Comma));
      }
      expect(Tok::Semi, "';'");
      r.forests.emplace_back(fn.text, std::move(f));
    }
    expect(Tok::RBrace, "'query', 'forest' or '}'");
    for (const auto& [n, tok] : ann.append_tokens)
      if (!r.forest(r.locator.appends.at(n)))
        fail(DiagCode::UndefinedForest, tok, "append names undefined forest '" + tok.text + "'");
    for (const auto& q : query_refs_)
      if (!r.query(q.text)) fail(DiagCode::UndefinedQuery, q, "forest refers to undefined query '" + q.text + "'");
    query_refs_.clear();
    try {
      check_rule(r);
    } catch (const UsageError& e) {
      fail(DiagCode::Syntax, name_tok, e.what());
    }
    return r;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, DataValue> strings_;
  DataValue next_string_value_ = 0;
  const std::set<std::string>* alphabet_ = nullptr;
  std::vector<Token> node_tokens_;
  std::vector<Token> query_refs_;
};

}  // namespace

DataTree parse_tree(std::string_view text) { return Parser(text).tree_file(); }
TreePattern parse_pattern(std::string_view text) { return Parser(text).pattern_file(); }
System parse_system(std::string_view text) { return Parser(text).system_file(); }

}  // namespace dtprs
