#include "acceptance/criteria.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

#include "satkit/generator.hpp"
#include "satkit/parallel.hpp"
#include "satkit/rng.hpp"
#include "satkit/stats.hpp"
#include "satkit/wsat.hpp"

namespace satkit::acceptance {

// Criterion 3: 200 satisfiable n=50 instances near threshold, R=250, noise
// 0.55: zero cap_exceeded at cap 1e7.
bool wsat_empirical_completeness(int workers) {
  const int kInstances = 200;
  const int kRuns = 250;
  std::atomic<int> capped{0};
  std::atomic<int> unsolved_units{0};
  parallel_for(workers, kInstances, [&](int i) {
    uint64_t seed = derive_seed(0xc0317u, static_cast<uint64_t>(i));
    Rng rng(seed);
    GenSpec spec{50, 215, 3, seed};
    CnfInstance inst = sample_satisfiable(spec, rng, 100000);
    CostParams params;
    params.runs = kRuns;
    params.wsat.noise_p = 0.55;
    params.wsat.max_flips = 10'000'000;
    params.wsat.rng_seed = derive_seed(seed, 1);
    InstanceCostStats stats = measure_cost(inst, params);
    capped += stats.cap_exceeded_runs;
    unsolved_units += stats.cap_exceeded_runs > 0;
  });
  std::printf("  cap_exceeded runs: %d across %d instances x %d runs\n",
              capped.load(), kInstances, kRuns);
  return capped.load() == 0;
}

namespace {

// Exact WSAT/SKC Markov chain over all 2^n assignments, derived directly
// from the published pseudocode semantics rather than from the engine:
// uniform unsatisfied clause, SKC variable distribution, single-bit flip.
struct ExactChain {
  int n;
  const CnfInstance &inst;
  double noise;
  std::vector<std::vector<double>> transition; // row-major dense, 2^n x 2^n
  std::vector<uint8_t> solution;

  ExactChain(const CnfInstance &instance, double p)
      : n(instance.num_vars()), inst(instance), noise(p) {
    size_t states = size_t{1} << n;
    transition.assign(states, std::vector<double>(states, 0.0));
    solution.assign(states, 0);
    for (size_t s = 0; s < states; ++s)
      build_row(s);
  }

  bool clause_satisfied(const Clause &c, size_t s) const {
    for (Lit l : c)
      if ((((s >> (l.var() - 1)) & 1) != 0) == l.is_positive())
        return true;
    return false;
  }

  void build_row(size_t s) {
    std::vector<int> unsat;
    for (int ci = 0; ci < inst.num_clauses(); ++ci)
      if (!clause_satisfied(inst.clause(ci), s))
        unsat.push_back(ci);
    if (unsat.empty()) {
      solution[s] = 1;
      return;
    }
    double clause_w = 1.0 / static_cast<double>(unsat.size());
    for (int ci : unsat) {
      // Literal reading of breaks[x]: flip x and recount.
      std::vector<int> vars;
      for (Lit l : inst.clause(ci))
        if (std::find(vars.begin(), vars.end(), l.var()) == vars.end())
          vars.push_back(l.var());
      std::vector<int> breaks;
      for (int x : vars) {
        size_t flipped = s ^ (size_t{1} << (x - 1));
        int broken = 0;
        for (int cj = 0; cj < inst.num_clauses(); ++cj)
          if (clause_satisfied(inst.clause(cj), s) &&
              !clause_satisfied(inst.clause(cj), flipped))
            ++broken;
        breaks.push_back(broken);
      }
      std::vector<double> var_prob(vars.size(), 0.0);
      std::vector<size_t> zeros;
      for (size_t i = 0; i < vars.size(); ++i)
        if (breaks[i] == 0)
          zeros.push_back(i);
      if (!zeros.empty()) {
        for (size_t i : zeros)
          var_prob[i] = 1.0 / static_cast<double>(zeros.size());
      } else {
        int best = *std::min_element(breaks.begin(), breaks.end());
        std::vector<size_t> mins;
        for (size_t i = 0; i < vars.size(); ++i)
          if (breaks[i] == best)
            mins.push_back(i);
        for (size_t i = 0; i < vars.size(); ++i)
          var_prob[i] += noise / static_cast<double>(vars.size());
        for (size_t i : mins)
          var_prob[i] += (1.0 - noise) / static_cast<double>(mins.size());
      }
      for (size_t i = 0; i < vars.size(); ++i)
        transition[s][s ^ (size_t{1} << (vars[i] - 1))] +=
            clause_w * var_prob[i];
    }
  }

  // Expected hitting time per state: (I - Q) h = 1 on transient states.
  std::vector<double> hitting_times() const {
    std::vector<size_t> transient;
    size_t states = transition.size();
    for (size_t s = 0; s < states; ++s)
      if (!solution[s])
        transient.push_back(s);
    size_t t = transient.size();
    std::vector<size_t> pos(states, SIZE_MAX);
    for (size_t i = 0; i < t; ++i)
      pos[transient[i]] = i;
    std::vector<std::vector<double>> a(t, std::vector<double>(t + 1, 0.0));
    for (size_t i = 0; i < t; ++i) {
      a[i][i] = 1.0;
      a[i][t] = 1.0;
      for (size_t j = 0; j < t; ++j)
        a[i][j] -= transition[transient[i]][transient[j]];
    }
    for (size_t col = 0; col < t; ++col) { // Gaussian elimination, pivoting
      size_t piv = col;
      for (size_t rrow = col + 1; rrow < t; ++rrow)
        if (std::fabs(a[rrow][col]) > std::fabs(a[piv][col]))
          piv = rrow;
      std::swap(a[col], a[piv]);
      for (size_t rrow = 0; rrow < t; ++rrow) {
        if (rrow == col || a[rrow][col] == 0.0)
          continue;
        double f = a[rrow][col] / a[col][col];
        for (size_t c = col; c <= t; ++c)
          a[rrow][c] -= f * a[col][c];
      }
    }
    std::vector<double> h(states, 0.0);
    for (size_t i = 0; i < t; ++i)
      h[transient[i]] = a[i][t] / a[i][i];
    return h;
  }

  double exact_mean_from_uniform() const {
    std::vector<double> h = hitting_times();
    double sum = 0;
    for (double v : h)
      sum += v;
    return sum / static_cast<double>(h.size());
  }

  // Smallest t with P(T <= t) >= 1/2 from a uniform start.
  int exact_median_from_uniform(int limit = 1 << 20) const {
    size_t states = transition.size();
    std::vector<double> mass(states, 1.0 / static_cast<double>(states));
    double absorbed = 0.0;
    for (size_t s = 0; s < states; ++s)
      if (solution[s]) {
        absorbed += mass[s];
        mass[s] = 0.0;
      }
    int t = 0;
    while (absorbed < 0.5 && t < limit) {
      std::vector<double> next(states, 0.0);
      for (size_t s = 0; s < states; ++s) {
        if (mass[s] == 0.0)
          continue;
        for (size_t d = 0; d < states; ++d) {
          double p = transition[s][d];
          if (p > 0.0)
            next[d] += mass[s] * p;
        }
      }
      for (size_t s = 0; s < states; ++s)
        if (solution[s]) {
          absorbed += next[s];
          next[s] = 0.0;
        }
      mass.swap(next);
      ++t;
    }
    return t;
  }
};

} // namespace

// Criterion 4: on 20 fixed satisfiable n=8 instances, empirical median and
// mean run length over 1e5 runs within 5% of the exact hitting-time values.
bool markov_chain_oracle(int workers) {
  const int kWanted = 20;
  const int kRuns = 100000;
  const int n = 8, m = 34;

  // Fixed deterministic pool of candidate seeds; keep instances whose exact
  // median is large enough for a 5% band to be meaningful.
  std::vector<CnfInstance> instances;
  std::vector<double> exact_means;
  std::vector<int> exact_medians;
  uint64_t stream = 0;
  while (static_cast<int>(instances.size()) < kWanted && stream < 4000) {
    uint64_t seed = derive_seed(0x3a60c4a12ULL, stream);
    ++stream;
    Rng rng(seed);
    GenSpec spec{n, m, 3, seed};
    CnfInstance inst = generate_random_ksat(spec, rng);
    ExactChain chain(inst, 0.55);
    bool any_solution = false;
    for (uint8_t s : chain.solution)
      any_solution = any_solution || s;
    if (!any_solution)
      continue;
    int med = chain.exact_median_from_uniform();
    if (med < 15)
      continue;
    instances.push_back(inst);
    exact_means.push_back(chain.exact_mean_from_uniform());
    exact_medians.push_back(med);
  }
  if (static_cast<int>(instances.size()) < kWanted) {
    std::printf("  could not assemble %d oracle instances\n", kWanted);
    return false;
  }

  std::vector<double> emp_mean(instances.size(), 0.0);
  std::vector<double> emp_median(instances.size(), 0.0);
  parallel_for(workers, static_cast<int>(instances.size()), [&](int i) {
    WsatEngine engine(instances[static_cast<size_t>(i)]);
    WsatParams params;
    params.noise_p = 0.55;
    params.max_flips = 100'000'000;
    std::vector<double> lengths;
    lengths.reserve(kRuns);
    double total = 0;
    for (int r = 0; r < kRuns; ++r) {
      Rng rng(derive_seed(0x3a6cULL, static_cast<uint64_t>(i),
                          static_cast<uint64_t>(r)));
      RunRecord rec = engine.run(params, rng);
      lengths.push_back(static_cast<double>(rec.run_length));
      total += static_cast<double>(rec.run_length);
    }
    emp_mean[static_cast<size_t>(i)] = total / kRuns;
    emp_median[static_cast<size_t>(i)] = median(lengths);
  });

  bool ok = true;
  for (size_t i = 0; i < instances.size(); ++i) {
    double mean_err =
        std::fabs(emp_mean[i] - exact_means[i]) / exact_means[i];
    double med_err = std::fabs(emp_median[i] - exact_medians[i]) /
                     static_cast<double>(exact_medians[i]);
    if (mean_err > 0.05 || med_err > 0.05) {
      std::printf("  instance %zu: mean %.2f vs %.2f (%.1f%%), median %.1f "
                  "vs %d (%.1f%%)\n",
                  i, emp_mean[i], exact_means[i], 100 * mean_err,
                  emp_median[i], exact_medians[i], 100 * med_err);
      ok = false;
    }
  }
  std::printf("  %zu instances checked against the 256-state chain\n",
              instances.size());
  return ok;
}

} // namespace satkit::acceptance
