#include <random>

#include <benchmark/benchmark.h>

#include "divcurl/divcurl_lab.hpp"
#include "divcurl/grid.hpp"
#include "divcurl/hodge.hpp"
#include "divcurl/oscillatory.hpp"

using namespace divcurl;

namespace {

Cochain random_cochain(const PeriodicGrid& grid, int degree, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.cell_count(degree)));
  for (auto& x : v) x = u(rng);
  return Cochain(grid, degree, v);
}

void BM_ExteriorDerivativeT3(benchmark::State& state) {
  const Cochain c = random_cochain(PeriodicGrid::cube(3, static_cast<int>(state.range(0))), 1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(exterior_derivative(c));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.size()));
}
BENCHMARK(BM_ExteriorDerivativeT3)->Arg(16)->Arg(32)->Arg(64);

void BM_LaplaceBeltramiT2(benchmark::State& state) {
  const Cochain c = random_cochain(PeriodicGrid::cube(2, static_cast<int>(state.range(0))), 1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(laplace_beltrami(c));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.size()));
}
BENCHMARK(BM_LaplaceBeltramiT2)->Arg(64)->Arg(256)->Arg(1024);

void BM_HodgeDecomposeT2(benchmark::State& state) {
  const Cochain c = random_cochain(PeriodicGrid::cube(2, static_cast<int>(state.range(0))), 1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(hodge_decompose(c));
}
BENCHMARK(BM_HodgeDecomposeT2)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_GenOscillatoryForm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  OscillatoryFamily fam;
  fam.resolution = {n, n};
  fam.period = {1.0, 1.0};
  fam.epsilons = dyadic_schedule(3, 5);
  for (auto _ : state) benchmark::DoNotOptimize(gen_oscillatory_form(fam, 2));
}
BENCHMARK(BM_GenOscillatoryForm)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_PairWithTest(benchmark::State& state) {
  const PeriodicGrid grid = PeriodicGrid::cube(2, static_cast<int>(state.range(0)));
  const Cochain a = random_cochain(grid, 1, 4), b = random_cochain(grid, 1, 5);
  const Cochain psi = sample_nodes(grid, [](const Point& x) { return x[0]; });
  for (auto _ : state) benchmark::DoNotOptimize(pair_with_test(a, b, psi));
}
BENCHMARK(BM_PairWithTest)->Arg(256)->Arg(1024);

}  // namespace
