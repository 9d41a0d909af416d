#include <benchmark/benchmark.h>

#include <numbers>

#include "lichflow/coefficient.hpp"
#include "lichflow/heatflow.hpp"
#include "lichflow/monotone.hpp"
#include "lichflow/spectral.hpp"

using namespace lichflow;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Grid bench_grid(int dim, int n) {
  return dim == 1 ? make_grid(1, {n}, {kTwoPi}) : make_grid(2, {n, n}, {kTwoPi, kTwoPi});
}

void BM_HelmholtzSolve(benchmark::State& state) {
  const Grid g = bench_grid(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const HelmholtzSolver solver(g);
  const Field rhs = materialize(CoefficientSpec::parse(g.dim() == 1 ? "1 + 0.5*cos(x)" : "1 + 0.5*cos(x)*sin(y)"), g);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(rhs, 3.0));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_HelmholtzSolve)->Args({1, 128})->Args({1, 4096})->Args({2, 64})->Args({2, 256});

void BM_ImexStep(benchmark::State& state) {
  const Grid g = bench_grid(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const ProblemData pd(2, 3, materialize(CoefficientSpec::parse("1 + 0.5*cos(x)"), g), Field(g, 1.0));
  const HelmholtzSolver solver(g);
  const FlowState s{0.0, 0.01, Field(g, 0.8)};
  const double omega = omega_bound(pd, 0.5, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(imex_step(pd, s, omega, solver));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_ImexStep)->Args({1, 128})->Args({1, 4096})->Args({2, 64})->Args({2, 256});

void BM_RunToSteady(benchmark::State& state) {
  const Grid g = bench_grid(1, static_cast<int>(state.range(0)));
  const ProblemData pd(2, 2, Field(g, 16.0), Field(g, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(run_to_steady(pd, Field(g, 1.0), {}));
}
BENCHMARK(BM_RunToSteady)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_MonotoneChain(benchmark::State& state) {
  const Grid g = bench_grid(1, static_cast<int>(state.range(0)));
  const ProblemData pd(3, 1, Field(g, 4.0), Field(g, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(iterate_chain(pd, Field(g, 1.0)));
}
BENCHMARK(BM_MonotoneChain)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
