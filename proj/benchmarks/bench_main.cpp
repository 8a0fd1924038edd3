#include <benchmark/benchmark.h>

#include <random>

#include "factorcov/factor_pc.hpp"
#include "factorcov/threshold.hpp"

using namespace factorcov;

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (double& x : m.data()) x = g(rng);
  return m;
}

void BM_SymEigen(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto a = scaled_gram(gaussian(dim, 2 * dim, 1), 2.0 * dim);
  for (auto _ : state) benchmark::DoNotOptimize(sym_eigen(a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SymEigen)->RangeMultiplier(2)->Range(25, 400)->Complexity(benchmark::oNCubed);

void BM_FitPC(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const DataMatrix y(gaussian(p, n, 2));
  for (auto _ : state) benchmark::DoNotOptimize(fit_pc(y, 3));
}
BENCHMARK(BM_FitPC)->Args({100, 400})->Args({200, 800})->Args({400, 200});

void BM_PluginThresholds(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const Matrix u = gaussian(p, 400, 3);
  for (auto _ : state) benchmark::DoNotOptimize(plugin_thresholds(u, 1.1, 0.05));
}
BENCHMARK(BM_PluginThresholds)->Arg(50)->Arg(100)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
