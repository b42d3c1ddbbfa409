#include "dtprs/rewrite.hpp"

namespace dtprs {

namespace {

void require_tags(const std::set<std::string>& alphabet, std::initializer_list<std::string> tags) {
  for (const auto& t : tags)
    if (!alphabet.count(t)) throw AlphabetError("service tag " + t + " is not in the alphabet");
}

}  // namespace

// [*](-[!f{self, ren=?f, append=T_X}], [WS{append=T_f}])
// with T_f = [f](Q, $X), T_X = $X and X fresh.
Rule compile_gaxml_call(const std::string& f, const Query& arg_query, const PatternFormula& call_guard,
                        const std::set<std::string>& alphabet) {
  require_tags(alphabet, {"!" + f, "?" + f, f, "WS"});
  Rule r;
  r.name = "call-" + f;
  TreePattern p(PatternLabel::wildcard());
  const NodeId site = p.add_child(p.root(), PatternLabel::tag("!" + f), Edge::Descendant);
  const NodeId ws = p.add_child(p.root(), PatternLabel::tag("WS"));
  p.set_self(site);
  r.locator.base = std::move(p);
  r.locator.renames[site] = "?" + f;
  r.locator.appends[site] = "T_X";
  r.locator.appends[ws] = "T_f";
  r.guard = call_guard;
  r.queries.emplace_back("Q", arg_query);

  TemplateTree tf(TemplateLabel::tag(f));
  tf.add_child(tf.root(), TemplateLabel::query("Q"));
  tf.add_child(tf.root(), TemplateLabel::variable("X"));
  r.forests.emplace_back("T_f", Forest{tf});
  r.forests.emplace_back("T_X", Forest{TemplateTree(TemplateLabel::variable("X"))});
  check_rule(r);
  return r;
}

// [*](-[*{append=T_Q}]([?f{self, ren=!f}]($X{del})), [WS]([f{del}]($Y{del}))) where $X == $Y
Rule compile_gaxml_return(const std::string& f, const Query& ret_query, const PatternFormula& ret_guard,
                          const std::set<std::string>& alphabet) {
  require_tags(alphabet, {"!" + f, "?" + f, f, "WS"});
  Rule r;
  r.name = "return-" + f;
  TreePattern p(PatternLabel::wildcard());
  const NodeId holder = p.add_child(p.root(), PatternLabel::wildcard(), Edge::Descendant);
  const NodeId site = p.add_child(holder, PatternLabel::tag("?" + f));
  const NodeId x = p.add_child(site, PatternLabel::variable("X"));
  const NodeId ws = p.add_child(p.root(), PatternLabel::tag("WS"));
  const NodeId call = p.add_child(ws, PatternLabel::tag(f));
  const NodeId y = p.add_child(call, PatternLabel::variable("Y"));
  p.set_self(site);
  p.set_cond(DataCond::eq("X", "Y"));
  r.locator.base = std::move(p);
  r.locator.appends[holder] = "T_Q";
  r.locator.renames[site] = "!" + f;
  r.locator.dels = {x, call, y};
  r.guard = ret_guard;
  r.queries.emplace_back("Q", ret_query);
  r.forests.emplace_back("T_Q", Forest{TemplateTree(TemplateLabel::query("Q"))});
  check_rule(r);
  return r;
}

}  // namespace dtprs
