// Serial reference paths against the OpenMP kernels. Argument 0 = serial, 1 = threaded.

#include "dtprs/analysis.hpp"
#include "dtprs/frontend.hpp"

#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

using namespace dtprs;

namespace {

std::string read_case(const std::string& name) {
  std::ifstream in(std::string(DTPRS_CASES_DIR) + "/" + name);
  if (!in) throw std::runtime_error("cannot open case " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExecPolicy policy_of(const benchmark::State& state) {
  return state.range(0) ? ExecPolicy::threaded() : ExecPolicy::serial();
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "threaded" : "serial"); }

void BM_LongestPath(benchmark::State& state) {
  const System sys = parse_system(read_case("playcom-instrumented.dtprs"));
  DataTree t = sys.init.trees.at(0);
  // Several carts sharing product ids give the graph a non-trivial 2-core.
  for (int i = 0; i < 3; ++i) {
    const NodeId cart = t.add_tag(0, "Cart");
    const NodeId products = t.add_tag(cart, "products");
    t.add_data(t.add_tag(products, "PId"), 1);
    t.add_data(t.add_tag(products, "PId"), static_cast<DataValue>(10 + i));
    t.add_tag(cart, "select");
    t.add_data(t.add_tag(t.add_tag(cart, "log"), "CId"), 0);
  }
  const LabeledGraph g = graph_of(t);
  const ExecPolicy p = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(longest_simple_path(g, p));
  label(state);
}

void BM_Succ(benchmark::State& state) {
  const System sys = parse_system(read_case("playcom.dtprs"));
  SuccOptions opts;
  opts.policy = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(succ(sys, sys.init.trees.at(0), opts));
  label(state);
}

void BM_Bmc(benchmark::State& state) {
  const System sys = parse_system(read_case("playcom-instrumented.dtprs"));
  const TreePattern bug = parse_pattern(read_case("playcom-bug.dtp"));
  BmcOptions opts;
  opts.policy = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(bmc(sys, bug, sys.init, 4, opts));
  label(state);
}

void BM_PredBasis(benchmark::State& state) {
  const System sys = parse_system(read_case("playcom-reduced-fixed.dtprs"));
  const TreePattern bug = parse_pattern(read_case("playcom-reduced-bug.dtp"));
  const Basis start = pattern_basis(sys, bug, 16, ExecPolicy::serial());
  const ExecPolicy p = policy_of(state);
  for (auto _ : state)
    for (const auto& t : start.trees) benchmark::DoNotOptimize(pred_basis(sys, t, 16, p));
  label(state);
}

void BM_Terminate(benchmark::State& state) {
  const System sys = parse_system(read_case("reset-net.dtprs"));
  TerminateOptions opts;
  opts.policy = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(terminate(sys, sys.init.trees.at(0), opts));
  label(state);
}

}  // namespace

BENCHMARK(BM_LongestPath)->Arg(0)->Arg(1);
BENCHMARK(BM_Succ)->Arg(0)->Arg(1);
BENCHMARK(BM_Bmc)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredBasis)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK(BM_Terminate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
