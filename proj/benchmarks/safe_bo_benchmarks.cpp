#include "safebo/experiment.hpp"
#include "safebo/safe_bo.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace safebo;

void BM_SelectAction(benchmark::State& state) {
  BenchmarkSpec spec;
  spec.grid_points = static_cast<int>(state.range(0));
  const SafeBoConfig cfg = make_bo_config(spec, BoundKind::WienerKernel);
  BoState bo = initial_state(cfg);
  for (int t = 1; t <= 20; ++t) {
    const Selection sel = select_action(bo, cfg);
    const double y_f = benchmark_f(spec, sel.x(0));
    bo = observe(bo, cfg, sel.x, y_f, -y_f + spec.f_min, sel.feasible);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_action(bo, cfg));
  }
}
BENCHMARK(BM_SelectAction)->Arg(101)->Arg(1001);

void BM_SingleRun(benchmark::State& state) {
  BenchmarkSpec spec;
  spec.steps = static_cast<int>(state.range(0));
  spec.runs = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_monte_carlo(spec, {BoundKind::WienerKernel}, 1, 1));
  }
}
BENCHMARK(BM_SingleRun)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
