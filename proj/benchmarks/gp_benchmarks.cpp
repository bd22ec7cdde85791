#include "safebo/bounds.hpp"
#include "safebo/gp.hpp"
#include "safebo/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

using namespace safebo;

std::vector<Point> random_points(int count, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  std::vector<Point> xs;
  xs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Point x(1);
    x(0) = dist(engine);
    xs.push_back(std::move(x));
  }
  return xs;
}

Eigen::VectorXd random_labels(int count, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> dist(0.0, 2.0);
  Eigen::VectorXd y(count);
  for (int i = 0; i < count; ++i) y(i) = dist(engine);
  return y;
}

const KernelSpec kKernel = KernelSpec::squared_exponential(4.21, 3.59);

void BM_GramMatrix(benchmark::State& state) {
  const auto xs = random_points(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gram_matrix(kKernel, xs));
  }
}
BENCHMARK(BM_GramMatrix)->Arg(10)->Arg(50)->Arg(100);

void BM_Fit(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Dataset data{random_points(d, 2), random_labels(d, 3)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(kKernel, data, 1.0));
  }
}
BENCHMARK(BM_Fit)->Arg(10)->Arg(50)->Arg(100);

void BM_PosteriorBatch(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const GpModel model = fit(kKernel, Dataset{random_points(d, 4), random_labels(d, 5)}, 1.0);
  const auto grid = random_points(1001, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(posterior_batch(model, grid));
  }
}
BENCHMARK(BM_PosteriorBatch)->Arg(10)->Arg(50)->Arg(100);

void BM_ErrorBoundBatch(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const GpModel model = fit(kKernel, Dataset{random_points(d, 7), random_labels(d, 8)}, 1.0);
  const auto grid = random_points(1001, 9);
  const PosteriorBatch posterior = posterior_batch(model, grid);
  const BoundSpec spec(BoundKind::WienerKernel, 2.5, 0.001);
  for (auto _ : state) {
    benchmark::DoNotOptimize(error_bound_batch(model, spec, posterior));
  }
}
BENCHMARK(BM_ErrorBoundBatch)->Arg(10)->Arg(100);

void BM_Beta1(benchmark::State& state) {
  const auto xs = random_points(static_cast<int>(state.range(0)), 10);
  const Eigen::MatrixXd gram = gram_matrix(kKernel, xs);
  for (auto _ : state) {
    benchmark::DoNotOptimize(beta_1(0.001, gram, 1.0));
  }
}
BENCHMARK(BM_Beta1)->Arg(10)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
