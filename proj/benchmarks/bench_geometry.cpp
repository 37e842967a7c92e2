#include <benchmark/benchmark.h>

#include "divcurl/cartan.hpp"
#include "divcurl/gcr.hpp"
#include "divcurl/golden.hpp"
#include "divcurl/oscillatory.hpp"
#include "divcurl/rigidity.hpp"

using namespace divcurl;

namespace {

void BM_FundamentalDataSphere(benchmark::State& state) {
  const GoldenSurface s = golden_surface("sphere", static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fundamental_data(s.immersion, s.frame));
}
BENCHMARK(BM_FundamentalDataSphere)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_GcrResidualsSphere(benchmark::State& state) {
  const GoldenSurface s = golden_surface("sphere", static_cast<int>(state.range(0)));
  const FundamentalData fd = fundamental_data(s.immersion, s.frame);
  for (auto _ : state) benchmark::DoNotOptimize(gcr_residuals(s.metric, fd));
}
BENCHMARK(BM_GcrResidualsSphere)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_RealizeSphere(benchmark::State& state) {
  const GoldenSurface s = golden_surface("sphere", static_cast<int>(state.range(0)));
  const FundamentalData fd = fundamental_data(s.immersion, s.frame);
  const FramePack fp = connection_forms(s.metric, fd);
  for (auto _ : state) {
    FrameIntegral fi = solve_pfaff(fp, frame_at(fd, 0), 0);
    benchmark::DoNotOptimize(solve_poincare(fp, std::move(fi), s.immersion.point(0)));
  }
}
BENCHMARK(BM_RealizeSphere)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_CorrugationWeakLimit(benchmark::State& state) {
  const Chart chart = strip_chart(static_cast<int>(state.range(0)), 8);
  const BendingFamily fam = corrugation_family(1.0, dyadic_schedule(3, 5), chart);
  const auto tests = rigidity_test_functions(chart);
  for (auto _ : state) benchmark::DoNotOptimize(weak_limit_family(fam, tests));
}
BENCHMARK(BM_CorrugationWeakLimit)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
