#include "dtprs/analysis.hpp"
#include "dtprs/canon.hpp"
#include "dtprs/frontend.hpp"
#include "dtprs/order.hpp"
#include "dtprs/pcp.hpp"
#include "dtprs/packaged_cases.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace dtprs;

namespace {

enum ExitCode { kOk = 0, kWitness = 1, kInconclusive = 2, kParseError = 3, kUsageError = 4, kBoundError = 5, kFailure = 6 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

struct Options {
  std::string spec, tree, pattern, init, format = "text", policy = "first", pairs, out_dir = ".";
  std::vector<std::string> files;
  int bound = -1, size_cap = 16, steps = 10, max_iterations = 256;
  std::size_t max_states = 2000000;
  std::uint64_t seed = 0;
  bool single_threaded = false;
};

bool json_out(const Options& o) { return o.format == "json-lines"; }

json valuation_json(const Valuation& v) {
  json j = json::object();
  for (const auto& [k, x] : v) j[k] = x;
  return j;
}

void print_trace(const Options& o, const Trace& tr) {
  if (json_out(o)) {
    std::cout << json{{"type", "start"}, {"tree", print_tree_raw(tr.start)}}.dump() << "\n";
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
      const auto& w = tr.steps[i];
      std::cout << json{{"type", "step"},
                        {"index", i + 1},
                        {"rule", w.rule},
                        {"matching", w.matching.image},
                        {"valuation", valuation_json(w.valuation)},
                        {"tree", print_tree_raw(w.result)}}
                       .dump()
                << "\n";
    }
    return;
  }
  std::cout << "start: " << print_tree_raw(tr.start) << "\n";
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    const auto& w = tr.steps[i];
    std::cout << "step " << i + 1 << ": " << w.rule << " matching [";
    for (std::size_t k = 0; k < w.matching.image.size(); ++k) std::cout << (k ? " " : "") << w.matching.image[k];
    std::cout << "] valuation {";
    std::size_t k = 0;
    for (const auto& [name, val] : w.valuation) std::cout << (k++ ? ", " : "") << name << "=@" << val;
    std::cout << "}\n  " << print_tree_raw(w.result) << "\n";
  }
}

void print_stats(const Stats& s) {
  std::cerr << "states=" << s.states << " iterations=" << s.iterations << " max_basis=" << s.max_basis
            << " seconds=" << s.seconds << "\n";
}

int report(const Options& o, const Verdict& v) {
  if (v.outcome == Outcome::Reachable || v.outcome == Outcome::Nonterminating) print_trace(o, v.trace);
  if (json_out(o)) {
    json j{{"type", "verdict"}, {"outcome", outcome_name(v.outcome)}, {"steps", v.trace.steps.size()}};
    if (!v.reason.empty()) j["reason"] = v.reason;
    if (v.outcome == Outcome::Nonterminating) {
      j["lasso_start"] = v.lasso_start;
      j["lasso_embedding"] = v.lasso_embedding;
    }
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "verdict: " << outcome_name(v.outcome);
    if (!v.reason.empty()) std::cout << " (" << v.reason << ")";
    std::cout << "\n";
    if (v.outcome == Outcome::Nonterminating)
      std::cout << "lasso: state " << v.lasso_start << " embeds into state " << v.trace.steps.size() << "\n";
  }
  print_stats(v.stats);
  return exit_code(v);
}

System load_system(const Options& o) {
  if (o.spec.empty()) throw UsageError("--spec is required");
  return parse_system(read_file(o.spec));
}

TreePattern load_pattern(const Options& o) {
  if (o.pattern.empty()) throw UsageError("--pattern is required");
  return parse_pattern(read_file(o.pattern));
}

// Start tree: --tree, else --init, else the first initial tree of the system.
DataTree start_tree(const Options& o, const System& sys) {
  if (!o.tree.empty()) return parse_tree(read_file(o.tree));
  if (!o.init.empty()) return parse_tree(read_file(o.init));
  if (sys.init.trees.empty()) throw UsageError("no start tree: pass --tree or declare explicit init trees");
  return sys.init.trees.front();
}

int cmd_validate(const Options& o) {
  const auto r = validate(load_system(o));
  if (json_out(o)) {
    json j{{"type", "validation"},
           {"system", r.system},
           {"dtd_non_recursive", r.dtd_non_recursive},
           {"dtd_positive", r.dtd_positive},
           {"guards_positive", r.guards_positive},
           {"invariant_positive", r.invariant_positive},
           {"simple_path_bound", r.has_path_bound},
           {"init_ok", r.init_ok},
           {"positive_eligible", r.positive_eligible},
           {"notes", r.notes},
           {"violations", r.violations}};
    if (r.derived_depth) j["dtd_depth"] = *r.derived_depth;
    std::cout << j.dump() << "\n";
  } else {
    std::cout << format_report(r);
  }
  return r.violations.empty() ? kOk : kParseError;
}

int cmd_simulate(const Options& o) {
  const System sys = load_system(o);
  SimPolicy p;
  p.seed = o.seed;
  if (o.policy == "first")
    p.kind = SimPolicy::Kind::First;
  else if (o.policy == "random")
    p.kind = SimPolicy::Kind::Random;
  else if (o.policy == "list")
    p.kind = SimPolicy::Kind::List;
  else
    throw UsageError("unknown policy " + o.policy);
  const auto sim = simulate(sys, start_tree(o, sys), o.steps, p);
  print_trace(o, sim.trace);
  for (std::size_t i = 0; i < sim.listings.size(); ++i) {
    for (const auto& w : sim.listings[i]) {
      if (json_out(o))
        std::cout << json{{"type", "enabled"}, {"state", i}, {"rule", w.rule}, {"matching", w.matching.image},
                          {"tree", print_tree_raw(w.result)}}
                         .dump()
                  << "\n";
      else
        std::cout << "enabled at state " << i << ": " << w.rule << " -> " << print_tree_raw(w.result) << "\n";
    }
  }
  if (!sim.note.empty()) std::cerr << "note: " << sim.note << "\n";
  return kOk;
}

int cmd_succ(const Options& o) {
  const System sys = load_system(o);
  const auto ws = succ(sys, start_tree(o, sys));
  for (const auto& w : ws) {
    if (json_out(o))
      std::cout << json{{"type", "successor"},
                        {"rule", w.rule},
                        {"matching", w.matching.image},
                        {"valuation", valuation_json(w.valuation)},
                        {"tree", print_tree_raw(w.result)}}
                       .dump()
                << "\n";
    else
      std::cout << w.rule << ": " << print_tree_raw(w.result) << "\n";
  }
  std::cerr << "successors=" << ws.size() << "\n";
  return kOk;
}

int cmd_reach(const Options& o) {
  const System sys = load_system(o);
  ReachOptions ro;
  ro.size_cap = o.size_cap;
  ro.max_iterations = o.max_iterations;
  return report(o, reach_backward(sys, load_pattern(o), ro));
}

int cmd_terminate(const Options& o) {
  const System sys = load_system(o);
  TerminateOptions to;
  to.max_states = o.max_states;
  return report(o, terminate(sys, start_tree(o, sys), to));
}

int cmd_bmc(const Options& o) {
  const System sys = load_system(o);
  if (o.bound < 0) throw UsageError("--bound is required");
  InitSpec init = sys.init;
  if (!o.init.empty()) init = InitSpec{{parse_tree(read_file(o.init))}, std::nullopt};
  BmcOptions bo;
  bo.max_states = o.max_states;
  return report(o, bmc(sys, load_pattern(o), init, o.bound, bo));
}

int cmd_embed(const Options& o) {
  if (o.files.size() != 2) throw UsageError("embed needs two tree files");
  const DataTree a = parse_tree(read_file(o.files[0])), b = parse_tree(read_file(o.files[1]));
  const auto e = embeds(a, b);
  if (json_out(o)) {
    json j{{"type", "embedding"}, {"embeds", e.has_value()}};
    if (e) j["map"] = *e;
    std::cout << j.dump() << "\n";
  } else if (e) {
    std::cout << "embeds:";
    for (std::size_t i = 0; i < e->size(); ++i) std::cout << " " << i << "->" << (*e)[i];
    std::cout << "\n";
  } else {
    std::cout << "no embedding\n";
  }
  return e ? kOk : kWitness;
}

std::string label_text(const GraphLabel& l) { return to_string(l); }

int cmd_decompose(const Options& o) {
  if (o.tree.empty()) throw UsageError("--tree is required");
  const DataTree t = parse_tree(read_file(o.tree));
  const LabeledGraph g = graph_of(t);
  const int K = o.bound >= 0 ? o.bound : longest_simple_path(g);
  const TreeDecomposition d = dfs_decomposition(g, K);
  const EncodedTree e = encode(d, g);
  std::ostringstream os;
  os << "vertices:\n";
  for (int v = 0; v < static_cast<int>(g.vertex_count()); ++v) {
    os << "  " << v << ": " << label_text(g.label(v)) << " ->";
    for (int w : g.neighbours(v)) os << " " << w;
    os << "\n";
  }
  os << "K: " << K << "\nwidth: " << d.width() << "\ndepth: " << d.depth() << "\nbags:\n";
  for (std::size_t n = 0; n < d.size(); ++n) {
    os << "  " << n << " (parent " << d.parent[n] << ", vertex " << d.vertex[n] << "): [";
    for (std::size_t i = 0; i < d.bags[n].size(); ++i) os << (i ? " " : "") << d.bags[n][i];
    os << "]\n";
  }
  os << "labels:\n";
  auto pairs = [&](const std::vector<std::pair<int, int>>& ps) {
    std::string s = "{";
    for (std::size_t i = 0; i < ps.size(); ++i)
      s += (i ? " " : "") + std::string("(") + std::to_string(ps[i].first) + "," + std::to_string(ps[i].second) + ")";
    return s + "}";
  };
  for (std::size_t n = 0; n < e.size(); ++n) {
    const auto& l = e.labels[n];
    os << "  " << n << ": word [";
    for (std::size_t i = 0; i < l.word.size(); ++i) os << (i ? " " : "") << label_text(l.word[i]);
    os << "] l1 " << pairs(l.l1) << " l2 " << pairs(l.l2) << " l3 " << pairs(l.l3) << "\n";
  }
  std::cout << os.str();
  return kOk;
}

PcpPairs parse_pairs(const std::string& text) {
  PcpPairs out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("pair '" + item + "' is not of the form u:v");
    out.emplace_back(item.substr(0, colon), item.substr(colon + 1));
  }
  return out;
}

int cmd_gen(const Options& o, const std::string& what) {
  fs::create_directories(o.out_dir);
  if (what == "pcp") {
    const auto sys = gen_pcp(parse_pairs(o.pairs));
    write_file(fs::path(o.out_dir) / "pcp.dtprs", sys.source);
    write_file(fs::path(o.out_dir) / "pcp-target.dtp", sys.target);
    std::cout << (fs::path(o.out_dir) / "pcp.dtprs").string() << "\n" << (fs::path(o.out_dir) / "pcp-target.dtp").string() << "\n";
    return kOk;
  }
  if (what == "examples") {
    for (const auto& c : packaged::kCases) {
      write_file(fs::path(o.out_dir) / std::string(c.name), c.text);
      std::cout << (fs::path(o.out_dir) / std::string(c.name)).string() << "\n";
    }
    return kOk;
  }
  throw UsageError("gen: expected pcp or examples");
}

int print_error(const char* kind, const std::string& msg, int code) {
  std::cerr << "error: " << kind << ": " << msg << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data tree pattern rewriting: simulation, reachability, termination and bounded model checking"};
  app.require_subcommand(1);
  Options o;
  auto shared = [&](CLI::App* c) {
    c->add_option("--spec", o.spec, "system file (.dtprs)");
    c->add_option("--tree", o.tree, "tree file (.dtree)");
    c->add_option("--pattern", o.pattern, "pattern file (.dtp)");
    c->add_option("--init", o.init, "initial tree file overriding the system's init");
    c->add_option("--bound", o.bound, "step bound (bmc) or K (decompose)");
    c->add_option("--size-cap", o.size_cap, "node cap for backward enumeration");
    c->add_option("--seed", o.seed, "random seed");
    c->add_option("--format", o.format, "text or json-lines")->check(CLI::IsMember({"text", "json-lines"}));
    c->add_flag("--single-threaded", o.single_threaded, "run the serial reference paths");
  };
  auto* validate_cmd = app.add_subcommand("validate", "check a system and classify it");
  auto* simulate_cmd = app.add_subcommand("simulate", "run rewriting steps");
  simulate_cmd->add_option("--steps", o.steps, "number of steps");
  simulate_cmd->add_option("--policy", o.policy, "first, random or list");
  auto* succ_cmd = app.add_subcommand("succ", "list one-step successors up to equivalence");
  auto* reach_cmd = app.add_subcommand("reach", "backward pattern reachability");
  reach_cmd->add_option("--max-iterations", o.max_iterations, "iteration limit");
  auto* term_cmd = app.add_subcommand("terminate", "termination from a tree");
  term_cmd->add_option("--max-states", o.max_states, "exploration limit");
  auto* bmc_cmd = app.add_subcommand("bmc", "bounded forward search for a pattern");
  bmc_cmd->add_option("--max-states", o.max_states, "exploration limit");
  auto* embed_cmd = app.add_subcommand("embed", "decide t1 ⪯ t2");
  embed_cmd->add_option("files", o.files, "two tree files")->expected(2);
  auto* decompose_cmd = app.add_subcommand("decompose", "DFS tree decomposition of a tree's graph");
  auto* gen_cmd = app.add_subcommand("gen", "write generated or packaged inputs");
  std::string what;
  gen_cmd->add_option("what", what, "pcp or examples")->required();
  gen_cmd->add_option("--pairs", o.pairs, "PCP pairs as u1:v1,u2:v2,...");
  gen_cmd->add_option("--out", o.out_dir, "output directory");
  for (auto* c : {validate_cmd, simulate_cmd, succ_cmd, reach_cmd, term_cmd, bmc_cmd, embed_cmd, decompose_cmd, gen_cmd})
    shared(c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }
  if (o.single_threaded) default_policy() = ExecPolicy::serial();

  try {
    if (*validate_cmd) return cmd_validate(o);
    if (*simulate_cmd) return cmd_simulate(o);
    if (*succ_cmd) return cmd_succ(o);
    if (*reach_cmd) return cmd_reach(o);
    if (*term_cmd) return cmd_terminate(o);
    if (*bmc_cmd) return cmd_bmc(o);
    if (*embed_cmd) return cmd_embed(o);
    if (*decompose_cmd) return cmd_decompose(o);
    if (*gen_cmd) return cmd_gen(o, what);
  } catch (const ParseError& e) {
    return print_error("parse", e.what(), kParseError);
  } catch (const PathBoundViolation& e) {
    return print_error("bound", e.what(), kBoundError);
  } catch (const BoundViolation& e) {
    return print_error("bound", e.what(), kBoundError);
  } catch (const std::invalid_argument& e) {
    return print_error("usage", e.what(), kUsageError);
  } catch (const std::exception& e) {
    return print_error("failure", e.what(), kFailure);
  }
  return kUsageError;
}
