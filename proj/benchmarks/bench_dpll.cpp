#include <benchmark/benchmark.h>

#include "satkit/backbone_lab.hpp"
#include "satkit/dpll.hpp"
#include "satkit/generator.hpp"

using namespace satkit;

namespace {

void BM_Solve(benchmark::State &state) {
  int n = static_cast<int>(state.range(0));
  GenSpec spec{n, static_cast<int>(4.3 * n), 3, 0};
  uint64_t seed = 3;
  for (auto _ : state) {
    state.PauseTiming();
    Rng rng(seed++);
    CnfInstance inst = generate_random_ksat(spec, rng);
    state.ResumeTiming();
    benchmark::DoNotOptimize(solve(inst).satisfiable);
  }
}

void BM_Backbone(benchmark::State &state) {
  int n = static_cast<int>(state.range(0));
  GenSpec spec{n, static_cast<int>(4.3 * n), 3, 0};
  Rng rng(5);
  CnfInstance inst = sample_satisfiable(spec, rng, 100000);
  for (auto _ : state)
    benchmark::DoNotOptimize(compute_backbone(inst).size());
}

void BM_CountSolutions(benchmark::State &state) {
  int n = static_cast<int>(state.range(0));
  GenSpec spec{n, static_cast<int>(4.3 * n), 3, 0};
  Rng rng(9);
  CnfInstance inst = sample_satisfiable(spec, rng, 100000);
  for (auto _ : state)
    benchmark::DoNotOptimize(count_solutions(inst));
}

void BM_RobustnessTrial(benchmark::State &state) {
  int n = static_cast<int>(state.range(0));
  GenSpec spec{n, static_cast<int>(4.3 * n), 3, 0};
  Rng rng(13);
  CnfInstance inst = sample_satisfiable(spec, rng, 100000);
  Backbone bb = compute_backbone(inst);
  while (bb.empty()) {
    inst = sample_satisfiable(spec, rng, 100000);
    bb = compute_backbone(inst);
  }
  uint64_t trial = 0;
  for (auto _ : state) {
    Rng trial_rng(derive_seed(13, trial++));
    benchmark::DoNotOptimize(robustness_trial(inst, bb, trial_rng));
  }
}

} // namespace

BENCHMARK(BM_Solve)->Arg(50)->Arg(100);
BENCHMARK(BM_Backbone)->Arg(50);
BENCHMARK(BM_CountSolutions)->Arg(30)->Arg(50);
BENCHMARK(BM_RobustnessTrial)->Arg(50);
