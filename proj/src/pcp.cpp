#include "dtprs/pcp.hpp"

#include "dtprs/frontend.hpp"

#include <sstream>

namespace dtprs {

namespace {

std::string pos_tag(char letter, bool hash, bool dollar) {
  std::string t(1, letter);
  if (hash) t += '#';
  if (dollar) t += '$';
  return format_ident(t);
}

std::string var(const std::string& v) { return "$" + v; }

std::string position(const std::string& tag, const std::string& in, const std::string& out) {
  std::string s = "[" + tag + "](";
  if (!in.empty()) s += "[in](" + var(in) + ")";
  if (!in.empty() && !out.empty()) s += ", ";
  if (!out.empty()) s += "[out](" + var(out) + ")";
  return s + ")";
}

std::string renamed(const std::string& tag, const std::string& to, const std::string& in, const std::string& out) {
  std::string s = "[" + tag + "{ren=" + to + "}](";
  if (!in.empty()) s += "[in](" + var(in) + ")";
  if (!in.empty() && !out.empty()) s += ", ";
  if (!out.empty()) s += "[out](" + var(out) + ")";
  return s + ")";
}

// Matches v[0..len) at the positions starting with the # marker; the last one may carry $.
// Returns the locator children; `out_var` names the value leaving the block.
std::vector<std::string> block(const std::string& v, std::size_t len, bool ends_last, std::string& out_var) {
  std::vector<std::string> nodes;
  for (std::size_t j = 0; j < len; ++j) {
    const bool first = j == 0, last = j + 1 == len;
    const std::string in = "X" + std::to_string(j), out = "X" + std::to_string(j + 1);
    const bool dollar = last && ends_last;
    const std::string tag = pos_tag(v[j], first, dollar);
    if (first || dollar)
      nodes.push_back(renamed(tag, pos_tag(v[j], false, false), in, out));
    else
      nodes.push_back(position(tag, in, out));
  }
  out_var = "X" + std::to_string(len);
  return nodes;
}

// Appended positions spelling u, starting from value `in`; # at index `hash` (none if npos).
std::string forest(const std::string& u, const std::string& in, std::size_t hash) {
  std::string s;
  std::string prev = in;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const std::string out = "Z" + std::to_string(j + 1);
    if (j) s += ", ";
    s += position(pos_tag(u[j], j == hash, j + 1 == u.size()), prev, out);
    prev = out;
  }
  return s;
}

void emit_rule(std::ostringstream& os, const std::string& name, const std::string& root,
               const std::vector<std::string>& kids, const std::string& forest_text) {
  os << "  rule " << name << " {\n    locator: " << root << "(";
  for (std::size_t i = 0; i < kids.size(); ++i) os << (i ? ", " : "") << kids[i];
  os << ");\n";
  if (!forest_text.empty()) os << "    forest F: " << forest_text << ";\n";
  os << "  }\n";
}

}  // namespace

PcpSystem gen_pcp(const PcpPairs& pairs) {
  if (pairs.empty()) throw UsageError("gen pcp: the instance has no pairs");
  for (const auto& [u, v] : pairs) {
    if (u.empty() || v.empty()) throw UsageError("gen pcp: pair words must be non-empty");
    for (char c : u + v)
      if (c != 'a' && c != 'b') throw UsageError("gen pcp: words must be over {a, b}");
  }
  const auto& [u1, v1] = pairs.front();
  if (v1.size() >= u1.size() || u1.compare(0, v1.size(), v1) != 0)
    throw UsageError("gen pcp: v1 must be a proper prefix of u1");

  std::ostringstream os;
  os << "# PCP instance:";
  for (const auto& [u, v] : pairs) os << " (" << u << ", " << v << ")";
  os << "\nsystem pcp {\n  alphabet { root, √, in, out";
  for (char c : {'a', 'b'})
    for (int m = 0; m < 4; ++m) os << ", " << pos_tag(c, m & 1, m & 2);
  os << " }\n  dtd {\n    root: root, √;\n  }\n";
  os << "  bounds { depth: 3; simple-path: none; }\n";

  os << "  init {\n    [root](";
  for (std::size_t i = 0; i < u1.size(); ++i) {
    if (i) os << ", ";
    os << "[" << pos_tag(u1[i], i == v1.size(), i + 1 == u1.size()) << "]([in](@" << i << "), [out](@" << i + 1
       << "))";
  }
  os << ");\n  }\n";

  const std::string append_root = "[root{append=F}]";
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    const auto& [u, v] = pairs[i];
    const std::string base = "p" + std::to_string(i + 1);
    const std::size_t q = v.size(), p = u.size();
    std::string out;
    // Gap of q+2 or more: the # moves to the position c after the block, $ leaves the last position d.
    for (char c : {'a', 'b'})
      for (char d : {'a', 'b'}) {
        auto kids = block(v, q, false, out);
        kids.push_back(renamed(pos_tag(c, false, false), pos_tag(c, true, false), out, ""));
        kids.push_back(renamed(pos_tag(d, false, true), pos_tag(d, false, false), "", "Y"));
        emit_rule(os, base + "_far_" + c + d, append_root, kids, forest(u, "Y", std::string::npos));
      }
    // Gap q+1: c is the last position.
    for (char c : {'a', 'b'}) {
      auto kids = block(v, q, false, out);
      kids.push_back(renamed(pos_tag(c, false, true), pos_tag(c, true, false), out, "Y"));
      emit_rule(os, base + "_near_" + c, append_root, kids, forest(u, "Y", std::string::npos));
    }
    // Gap q: V catches up with U, the # lands on the first appended position.
    {
      auto kids = block(v, q, true, out);
      emit_rule(os, base + "_even", append_root, kids, forest(u, out, 0));
    }
    // Gap k < q: the tail of v is matched against the head of u.
    for (std::size_t k = 1; k < q; ++k) {
      if (p <= q - k || v.compare(k, q - k, u, 0, q - k) != 0) continue;
      auto kids = block(v, k, true, out);
      emit_rule(os, base + "_over" + std::to_string(k), append_root, kids, forest(u, out, q - k));
    }
  }
  {
    const auto& [u, v] = pairs.back();
    const std::size_t q = v.size(), p = u.size();
    if (q > p && v.compare(q - p, p, u) == 0) {
      std::string out;
      auto kids = block(v, q - p, true, out);
      emit_rule(os, "p" + std::to_string(pairs.size()) + "_close", "[root{ren=√}]", kids, "");
    }
  }
  os << "}\n";
  return PcpSystem{os.str(), "[√]\n"};
}

}  // namespace dtprs
