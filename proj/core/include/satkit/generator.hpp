#pragma once

#include <cstdint>
#include <optional>

#include "satkit/cnf.hpp"
#include "satkit/dpll.hpp"
#include "satkit/rng.hpp"

namespace satkit {

/// Random k-SAT generation spec; the ratio m/n is the control parameter.
struct GenSpec {
  int n = 0;
  int m = 0;
  int k = 3;
  uint64_t rng_seed = 0;
};

/// m clauses, each over k distinct variables drawn uniformly from 1..n, each
/// literal negated by an independent fair coin. Duplicate clauses are
/// possible and some variables may go unmentioned. Throws
/// std::invalid_argument when k > n or k < 0.
CnfInstance generate_random_ksat(const GenSpec &spec, Rng &rng);

struct SampleReport {
  int attempts = 0;
};

/// Rejection-samples instances until one is verified satisfiable by the
/// complete solver. Throws BudgetExhausted after `budget` attempts.
CnfInstance sample_satisfiable(const GenSpec &spec, Rng &rng, int budget,
                               SampleReport *report = nullptr,
                               const SolverBudget &solver_budget = {});

/// Rejection-samples satisfiable instances until the backbone size lands
/// within `tolerance` of `target` (exactly `target` by default). Rejection
/// can be extreme for rare backbone sizes; the attempt count is reported.
/// The accepted instance's backbone is returned through `backbone_out` when
/// non-null (it was computed anyway).
CnfInstance sample_with_backbone_size(const GenSpec &spec, int target,
                                      Rng &rng, int budget,
                                      SampleReport *report = nullptr,
                                      int tolerance = 0,
                                      Backbone *backbone_out = nullptr,
                                      const SolverBudget &solver_budget = {});

} // namespace satkit
