#include <benchmark/benchmark.h>

#include "satkit/generator.hpp"
#include "satkit/wsat.hpp"

using namespace satkit;

namespace {

CnfInstance threshold_instance(int n, uint64_t seed) {
  GenSpec spec{n, static_cast<int>(4.3 * n), 3, seed};
  Rng rng(seed);
  return sample_satisfiable(spec, rng, 100000);
}

void BM_WsatFlips(benchmark::State &state) {
  CnfInstance inst = threshold_instance(static_cast<int>(state.range(0)), 7);
  WsatEngine engine(inst);
  WsatParams params;
  params.max_flips = 10'000'000;
  uint64_t total_flips = 0;
  uint64_t run = 0;
  for (auto _ : state) {
    Rng rng(derive_seed(7, run++));
    RunRecord rec = engine.run(params, rng);
    total_flips += rec.run_length;
  }
  state.counters["flips/s"] = benchmark::Counter(
      static_cast<double>(total_flips), benchmark::Counter::kIsRate);
}

void BM_MeasureCost(benchmark::State &state) {
  CnfInstance inst = threshold_instance(50, 11);
  for (auto _ : state) {
    CostParams params;
    params.runs = static_cast<int>(state.range(0));
    params.wsat.rng_seed = 11;
    params.wsat.max_flips = 10'000'000;
    InstanceCostStats stats = measure_cost(inst, params);
    benchmark::DoNotOptimize(stats.cost);
  }
}

} // namespace

BENCHMARK(BM_WsatFlips)->Arg(50)->Arg(100);
BENCHMARK(BM_MeasureCost)->Arg(100);

BENCHMARK_MAIN();
