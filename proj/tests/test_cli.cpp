#include "oracles.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace dtprs;
using namespace oracle;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(DTPRS_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  Run r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string c(const std::string& name) { return case_path(name); }

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / ("dtprs-cli-" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
  std::ofstream(dir / name) << text;
  return dir / name;
}

std::vector<nlohmann::json> json_lines(const std::string& out) {
  std::vector<nlohmann::json> v;
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) v.push_back(nlohmann::json::parse(line));
  return v;
}

}  // namespace

TEST_CASE("validate") {
  CHECK(cli("validate --spec " + c("playcom.dtprs")).code == 0);
  const fs::path d = scratch();
  const auto rec = write(d, "rec.dtprs",
                         "system q { alphabet { r, a } dtd { root: r; r -> |a| >= 0; a -> |a| >= 0; } "
                         "bounds { depth: 2; simple-path: 4; } init { [r]; } }");
  CHECK(cli("validate --spec " + rec.string()).code == 3);
  const auto j = json_lines(cli("validate --format json-lines --spec " + c("playcom.dtprs")).out);
  REQUIRE(j.size() == 1);
  CHECK(j[0]["type"] == "validation");
}

TEST_CASE("bmc finds the Play.com bug with a replayable json trace") {
  const std::string args = "bmc --single-threaded --spec " + c("playcom-instrumented.dtprs") + " --pattern " +
                           c("playcom-bug.dtp") + " --format json-lines --bound ";
  const Run hit = cli(args + "4");
  CHECK(hit.code == 1);
  const auto lines = json_lines(hit.out);
  REQUIRE(lines.size() == 6);
  CHECK(lines.front()["type"] == "start");
  CHECK(lines.back()["type"] == "verdict");
  CHECK(lines.back()["outcome"] == "REACHABLE");
  const System sys = load_system("playcom-instrumented.dtprs");
  Trace tr;
  tr.start = parse_tree(lines.front()["tree"].get<std::string>());
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
    CHECK(lines[i]["type"] == "step");
    const Rule* r = sys.rule(lines[i]["rule"].get<std::string>());
    REQUIRE(r);
    const auto image = lines[i]["matching"].get<std::vector<NodeId>>();
    std::optional<StepWitness> step;
    for (auto& w : enabled(sys, *r, tr.last()))
      if (w.matching.image == image) step = std::move(w);
    REQUIRE(step);
    CHECK(print_tree_raw(step->result) == lines[i]["tree"].get<std::string>());
    tr.steps.push_back(*step);
  }
  const TreePattern bug = load_pattern("playcom-bug.dtp");
  CHECK(verify_trace(sys, tr, &bug));
  CHECK(cli(args + "3").code == 2);
  CHECK(cli(args + "4").out == hit.out);
}

TEST_CASE("terminate and reach") {
  CHECK(cli("terminate --spec " + c("loop.dtprs")).code == 1);
  CHECK(cli("terminate --spec " + c("delete-only.dtprs")).code == 0);
  CHECK(cli("terminate --spec " + c("reset-net.dtprs")).code == 0);
  const fs::path d = scratch();
  const auto chain = write(d, "chain.dtprs",
                           "system chain { alphabet { a, b, c } dtd { root: a, b, c; } "
                           "bounds { depth: 1; simple-path: 2; } init { [a]; } "
                           "rule ab { locator: [a{ren=b}]; } rule bc { locator: [b{ren=c}]; } }");
  const auto pc = write(d, "c.dtp", "[c]");
  const auto pd = write(d, "d.dtp", "[a]([b])");
  const Run r = cli("reach --spec " + chain.string() + " --pattern " + pc.string());
  CHECK(r.code == 1);
  CHECK(r.out.find("step 2: bc") != std::string::npos);
  CHECK(cli("reach --spec " + chain.string() + " --pattern " + pd.string()).code == 0);
}

TEST_CASE("simulate and succ") {
  const std::string base = "simulate --spec " + c("playcom.dtprs") + " --steps 5 --policy random --seed 3";
  const Run a = cli(base), b = cli(base);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(cli("succ --spec " + c("playcom.dtprs")).code == 0);
  const auto lines = json_lines(cli("succ --format json-lines --spec " + c("playcom.dtprs")).out);
  const System play = load_system("playcom.dtprs");
  std::size_t successors = 0;
  for (const auto& l : lines) successors += l["type"] == "successor";
  CHECK(successors == succ(play, play.init.trees[0]).size());
}

TEST_CASE("embed and decompose") {
  const fs::path d = scratch();
  const auto small = write(d, "small.dtree", "[Play.com]([Cart]([products]([PId](@4), [PId](@4))))");
  const auto unequal = write(d, "unequal.dtree", "[Play.com]([Cart]([products]([PId](@4), [PId](@5))))");
  const std::string fig3 = c("fig3.dtree");
  CHECK(cli("embed " + small.string() + " " + fig3).code == 0);
  CHECK(cli("embed " + unequal.string() + " " + fig3).code == 1);
  const Run dec = cli("decompose --tree " + fig3);
  CHECK(dec.code == 0);
  CHECK(dec.out.find("width:") != std::string::npos);
}

TEST_CASE("gen") {
  const fs::path d = scratch();
  CHECK(cli("gen pcp --pairs bbb:bb,a:b,a:aaa --out " + d.string()).code == 0);
  CHECK(cli("bmc --spec " + (d / "pcp.dtprs").string() + " --pattern " + (d / "pcp-target.dtp").string() +
            " --bound 4")
            .code == 1);
  CHECK(cli("validate --spec " + (d / "pcp.dtprs").string()).code == 0);
  CHECK(cli("gen pcp --pairs a:ab --out " + d.string()).code == 4);

  const fs::path ex = d / "examples";
  CHECK(cli("gen examples --out " + ex.string()).code == 0);
  int systems = 0;
  for (const auto& e : fs::directory_iterator(ex)) {
    const std::string text = read_file(e.path().string());
    if (e.path().extension() == ".dtprs") {
      CHECK(validate(parse_system(text)).violations.empty());
      ++systems;
    } else if (e.path().extension() == ".dtp") {
      CHECK_NOTHROW(parse_pattern(text));
    } else if (e.path().extension() == ".dtree") {
      CHECK_NOTHROW(parse_tree(text));
    }
  }
  CHECK(systems >= 6);
}

TEST_CASE("error exit codes") {
  const fs::path d = scratch();
  const auto bad = write(d, "bad.dtprs", "system s { alphabet r }");
  CHECK(cli("validate --spec " + bad.string()).code == 3);
  CHECK(cli("bmc --pattern " + c("playcom-bug.dtp")).code == 4);
  CHECK(cli("frobnicate").code == 4);
  const auto grow = write(d, "grow.dtprs",
                          "system g { alphabet { r, a } dtd { root: r; } bounds { depth: 1; simple-path: 1; } "
                          "init { [r]([a]); } rule g { locator: [r{append=F}]; forest F: [a]; } }");
  CHECK(cli("succ --spec " + grow.string()).code == 5);
  CHECK(cli("validate --spec " + (d / "missing.dtprs").string()).code == 4);
}
