#include "satkit/generator.hpp"

#include <numeric>
#include <stdexcept>

#include "satkit/errors.hpp"

namespace satkit {

CnfInstance generate_random_ksat(const GenSpec &spec, Rng &rng) {
  if (spec.k < 0 || spec.k > spec.n)
    throw std::invalid_argument("generate_random_ksat: need 0 <= k <= n");
  if (spec.m < 0)
    throw std::invalid_argument("generate_random_ksat: negative clause count");
  std::vector<int> pool(static_cast<size_t>(spec.n));
  std::iota(pool.begin(), pool.end(), 1);
  std::vector<Clause> clauses;
  clauses.reserve(static_cast<size_t>(spec.m));
  for (int c = 0; c < spec.m; ++c) {
    Clause clause;
    clause.reserve(static_cast<size_t>(spec.k));
    // Partial Fisher-Yates: the first k entries become a uniform ordered
    // sample of distinct variables.
    for (int i = 0; i < spec.k; ++i) {
      size_t j = static_cast<size_t>(i) +
                 static_cast<size_t>(rng.below(
                     static_cast<uint64_t>(spec.n - i)));
      std::swap(pool[static_cast<size_t>(i)], pool[j]);
      int var = pool[static_cast<size_t>(i)];
      clause.push_back(rng.coin() ? Lit::positive(var) : Lit::negative(var));
    }
    clauses.push_back(std::move(clause));
  }
  return CnfInstance(spec.n, std::move(clauses));
}

CnfInstance sample_satisfiable(const GenSpec &spec, Rng &rng, int budget,
                               SampleReport *report,
                               const SolverBudget &solver_budget) {
  if (budget < 1)
    throw std::invalid_argument("sample_satisfiable: budget must be >= 1");
  for (int attempt = 1; attempt <= budget; ++attempt) {
    CnfInstance inst = generate_random_ksat(spec, rng);
    if (solve(inst, solver_budget).satisfiable) {
      if (report)
        report->attempts = attempt;
      return inst;
    }
  }
  throw BudgetExhausted("sample_satisfiable: no satisfiable instance within " +
                        std::to_string(budget) + " attempts");
}

CnfInstance sample_with_backbone_size(const GenSpec &spec, int target,
                                      Rng &rng, int budget,
                                      SampleReport *report, int tolerance,
                                      Backbone *backbone_out,
                                      const SolverBudget &solver_budget) {
  if (target < 0 || target > spec.n)
    throw std::invalid_argument(
        "sample_with_backbone_size: target outside [0, n]");
  if (budget < 1)
    throw std::invalid_argument("sample_with_backbone_size: budget must be >= 1");
  for (int attempt = 1; attempt <= budget; ++attempt) {
    CnfInstance inst = generate_random_ksat(spec, rng);
    SolveResult r = solve(inst, solver_budget);
    if (!r.satisfiable)
      continue;
    Backbone b = compute_backbone(inst, solver_budget);
    if (std::abs(b.size() - target) <= tolerance) {
      if (report)
        report->attempts = attempt;
      if (backbone_out)
        *backbone_out = std::move(b);
      return inst;
    }
  }
  throw BudgetExhausted(
      "sample_with_backbone_size: no instance with backbone near " +
      std::to_string(target) + " within " + std::to_string(budget) +
      " attempts");
}

} // namespace satkit
