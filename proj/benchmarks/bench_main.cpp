#include <benchmark/benchmark.h>

#include "minleaf/cart.hpp"
#include "minleaf/gbdt.hpp"
#include "minleaf/mio.hpp"
#include "minleaf/search.hpp"

using namespace minleaf;

namespace {

Dataset synthetic(std::size_t n, std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n * p);
  for (auto& v : x) v = uniform01(rng);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = &x[i * p];
    y[i] = ((r[0] + 0.5 * r[1 % p] > 0.7) != (r[2 % p] < 0.4)) != (uniform01(rng) < 0.2) ? 1 : 0;
  }
  y[0] = 0;
  y[1] = 1;
  return Dataset(p, std::move(x), std::move(y), 2);
}

void BM_Solve(benchmark::State& state) {
  const auto ds = synthetic(static_cast<std::size_t>(state.range(0)), 6, 1);
  SearchConfig cfg;
  cfg.depth = static_cast<int>(state.range(1));
  cfg.n_min = 20;
  cfg.time_budget = 60;
  for (auto _ : state) benchmark::DoNotOptimize(solve(ds, cfg).objective_value);
}
BENCHMARK(BM_Solve)->Args({200, 2})->Args({500, 2})->Args({200, 3})->Unit(benchmark::kMillisecond);

void BM_Cart(benchmark::State& state) {
  const auto ds = synthetic(static_cast<std::size_t>(state.range(0)), 10, 2);
  CartConfig cfg;
  cfg.max_depth = 4;
  cfg.min_samples_leaf = 10;
  for (auto _ : state) benchmark::DoNotOptimize(cart_train(ds, cfg).size());
}
BENCHMARK(BM_Cart)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Gbdt(benchmark::State& state) {
  const auto ds = synthetic(static_cast<std::size_t>(state.range(0)), 8, 3);
  GbdtConfig cfg;
  cfg.n_trees = 50;
  for (auto _ : state) benchmark::DoNotOptimize(gbdt_train(ds, cfg, 0).trees.size());
}
BENCHMARK(BM_Gbdt)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_EmitLp(benchmark::State& state) {
  const auto ds = synthetic(static_cast<std::size_t>(state.range(0)), 5, 4);
  const auto model = build_mio(ds, compute_epsilon(ds), 2, 5, Objective::leaf_accuracy);
  for (auto _ : state) benchmark::DoNotOptimize(emit_lp(model).size());
}
BENCHMARK(BM_EmitLp)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
