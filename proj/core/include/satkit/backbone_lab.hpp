#pragma once

#include <cstdint>
#include <optional>

#include "satkit/cnf.hpp"
#include "satkit/dpll.hpp"
#include "satkit/rng.hpp"

namespace satkit {

/// Mean clause-deletions-to-halve-backbone statistic.
struct RobustnessEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
  bool converged = false;
  std::vector<int> halved_sizes; // terminal backbone size per trial
  std::vector<int> results;      // clauses removed per trial
};

/// One robustness trial: clauses are deleted uniformly at random without
/// replacement, recomputing the backbone after every single removal, until
/// the current backbone size is at most floor(|backbone|/2); returns the
/// number of clauses deleted. `backbone` must equal compute_backbone(C) and
/// be nonempty (RobustnessUndefined otherwise). `halved_size_out`, when
/// non-null, receives the terminal backbone size.
int robustness_trial(const CnfInstance &instance, const Backbone &backbone,
                     Rng &rng, int *halved_size_out = nullptr,
                     const SolverBudget &budget = {});

struct RobustnessParams {
  int min_trials = 100;
  double rel_se = 0.05; // convergence: std_error < rel_se * mean
  int max_trials = 2000;
  /// Convergence is evaluated at min_trials and then every `check_stride`
  /// further trials, so the trial count never depends on scheduling.
  int check_stride = 10;
  int workers = 1;
  SolverBudget solver_budget;
};

/// Samples robustness trials with per-trial derived seeds until converged or
/// max_trials (flagged, not fatal). The backbone is computed once here.
RobustnessEstimate estimate_robustness(const CnfInstance &instance,
                                       uint64_t rng_seed,
                                       const RobustnessParams &params = {});

/// The clause violating every backbone literal: ¬l1 ∨ ¬l2 ∨ … ∨ ¬lk.
/// An empty backbone yields the empty clause.
Clause build_d_clause(const Backbone &backbone);

/// Deletion-based minimal unsatisfiable sub-instance: visits clauses in a
/// uniformly random order, keeping each removed iff the remainder stays
/// unsatisfiable. The result is unsatisfiable and every single-clause
/// deletion from it is satisfiable. A protected clause is never tentatively
/// removed. Throws std::invalid_argument on satisfiable input.
RemovedInstance find_mus(const CnfInstance &instance, Rng &rng,
                         std::optional<int> protected_index = std::nullopt,
                         const SolverBudget &budget = {});

/// Backbone-minimal sub-instance plus provenance.
struct BmsResult {
  CnfInstance sub_instance;
  std::vector<int> parent_indices; // per surviving clause, index in parent
  Backbone backbone;               // shared with the parent
};

/// Appends the d-clause, extracts an MUS of C ∧ d with d protected, then
/// drops d: the remainder is a BMS of C. Throws BackboneUndefined on
/// unsatisfiable input.
BmsResult find_bms(const CnfInstance &instance, Rng &rng,
                   const SolverBudget &budget = {});

/// Removes m_r uniformly-random clauses drawn from those outside the BMS (by
/// parent index); the result provably keeps the parent's backbone. Throws
/// std::invalid_argument when m_r exceeds m - |BMS|.
RemovedInstance preserve_backbone_removal(const CnfInstance &instance,
                                          const BmsResult &bms, int m_r,
                                          Rng &rng);

/// Uniform removal of m_r clauses without replacement.
RemovedInstance random_removal(const CnfInstance &instance, int m_r, Rng &rng);

struct ReduceBackboneResult {
  CnfInstance instance;
  std::vector<int> parent_index;
  int removals = 0; // may stop early when the backbone empties
};

/// Iteratively removes a uniformly-random clause among those whose single
/// removal strictly shrinks the current backbone; stops after m_r removals
/// or when the backbone is empty.
ReduceBackboneResult reduce_backbone_removal(const CnfInstance &instance,
                                             int m_r, Rng &rng,
                                             const SolverBudget &budget = {});

/// bc[i] = |backbone(C)| - |backbone(C - {clause i})| for every clause index;
/// nonnegative by backbone monotonicity. Throws BackboneUndefined on
/// unsatisfiable input.
std::vector<int> backbone_contribution(const CnfInstance &instance,
                                       const SolverBudget &budget = {});

} // namespace satkit
