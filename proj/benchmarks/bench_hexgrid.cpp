#include <benchmark/benchmark.h>

#include "spheretile/hexgrid.hpp"

using namespace spheretile;

static void BM_EdgeStepCycle(benchmark::State& state) {
  std::array<ColorId, 7> seq{0, 1, 2, 3, 4, 5, 6};
  for (auto _ : state) {
    auto s = seq;
    for (int i = 0; i < 5; ++i) s = edge_step(s);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_EdgeStepCycle);

static void BM_PermCompose(benchmark::State& state) {
  Perm7 a = perm_swap23(), b = perm_hex();
  for (auto _ : state) {
    Perm7 c = perm_compose(a, b);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_PermCompose);

static void BM_SeparationRatio(benchmark::State& state) {
  for (auto _ : state) {
    double r = isbell_separation_ratio(static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_SeparationRatio)->Arg(8)->Arg(12);

BENCHMARK_MAIN();
