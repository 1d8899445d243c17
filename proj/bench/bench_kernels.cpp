#include <benchmark/benchmark.h>

#include <random>

#include "noisycover/kernels.hpp"

using namespace noisycover;

namespace {

Dataset random_dataset(int m, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset data;
  data.images = RowMatrix::NullaryExpr(m, d, [&] { return u(rng); });
  for (int i = 0; i < m; ++i) data.labels.push_back(i % 10);
  return data;
}

const NetworkArch kArch{784, {250, 250, 250, 10}, 0.05, 0.1};

template <Matrix (*F)(const ParamSet&, const Dataset&, EvalMode, double, std::uint64_t)>
void BM_BatchOutputs(benchmark::State& state) {
  const ParamSet p = init_params(kArch, 1);
  const Dataset data = random_dataset(static_cast<int>(state.range(0)), 784, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(F(p, data, EvalMode::expected(4), 0.05, 3));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_TEMPLATE(BM_BatchOutputs, kernels::batch_outputs_serial)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_BatchOutputs, kernels::batch_outputs_parallel)->Arg(512)->Unit(benchmark::kMillisecond);

using SmoothFn = std::vector<double> (*)(std::span<const double>, std::span<const double>, double,
                                         double, double, double, std::size_t);

template <SmoothFn F>
void BM_GaussianSmooth(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> centres(n);
  std::vector<double> values(n, 1.0);
  const double h = 2.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) centres[j] = -1.0 + (static_cast<double>(j) + 0.5) * h;
  for (auto _ : state) {
    benchmark::DoNotOptimize(F(centres, values, h, 0.1, -2.0, h, 2 * n));
  }
}
BENCHMARK_TEMPLATE(BM_GaussianSmooth, kernels::gaussian_smooth_serial)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_GaussianSmooth, kernels::gaussian_smooth_parallel)->Arg(4000)->Unit(benchmark::kMillisecond);

using DistFn = std::vector<double> (*)(const Matrix&, std::span<const Matrix>, bool);

template <DistFn F>
void BM_Distances(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Matrix> pool(static_cast<std::size_t>(state.range(0)));
  for (Matrix& m : pool) m = Matrix::NullaryExpr(100, 10, [&] { return g(rng); });
  const Matrix query = Matrix::NullaryExpr(100, 10, [&] { return g(rng); });
  for (auto _ : state) benchmark::DoNotOptimize(F(query, pool, true));
}
BENCHMARK_TEMPLATE(BM_Distances, kernels::distances_serial)->Arg(2000)->Unit(benchmark::kMicrosecond);
BENCHMARK_TEMPLATE(BM_Distances, kernels::distances_parallel)->Arg(2000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
