#include "satkit/backbone_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "satkit/errors.hpp"
#include "satkit/parallel.hpp"

namespace satkit {

namespace {

CnfInstance masked_instance(const CnfInstance &inst,
                            const std::vector<uint8_t> &removed) {
  std::vector<Clause> kept;
  kept.reserve(static_cast<size_t>(inst.num_clauses()));
  for (int i = 0; i < inst.num_clauses(); ++i)
    if (!removed[static_cast<size_t>(i)])
      kept.push_back(inst.clause(i));
  return CnfInstance(inst.num_vars(), std::move(kept));
}

// Any model of the parent instance keeps satisfying every sub-instance, so
// one witness serves a whole removal sequence as a backbone-recheck hint.
int trial_impl(const CnfInstance &inst, const Backbone &backbone,
               const Assignment &witness, Rng &rng, int *halved_size_out,
               const SolverBudget &budget) {
  int threshold = backbone.size() / 2;
  std::vector<int> order(static_cast<size_t>(inst.num_clauses()));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<uint8_t> removed(static_cast<size_t>(inst.num_clauses()), 0);
  std::vector<Lit> candidates(backbone.literals().begin(),
                              backbone.literals().end());
  int removed_count = 0;
  int current_size = backbone.size();
  while (current_size > threshold) {
    removed[static_cast<size_t>(order[static_cast<size_t>(removed_count)])] = 1;
    ++removed_count;
    CnfInstance active = masked_instance(inst, removed);
    Backbone b = compute_backbone(active, candidates, &witness, budget);
    candidates.assign(b.literals().begin(), b.literals().end());
    current_size = b.size();
  }
  if (halved_size_out)
    *halved_size_out = current_size;
  return removed_count;
}

} // namespace

int robustness_trial(const CnfInstance &instance, const Backbone &backbone,
                     Rng &rng, int *halved_size_out,
                     const SolverBudget &budget) {
  if (backbone.empty())
    throw RobustnessUndefined("robustness_trial: backbone is empty");
  SolveResult r = solve(instance, budget);
  if (!r.satisfiable)
    throw BackboneUndefined("robustness_trial: instance is unsatisfiable");
  return trial_impl(instance, backbone, *r.witness, rng, halved_size_out,
                    budget);
}

RobustnessEstimate estimate_robustness(const CnfInstance &instance,
                                       uint64_t rng_seed,
                                       const RobustnessParams &params) {
  if (params.min_trials < 1 || params.max_trials < params.min_trials)
    throw std::invalid_argument("estimate_robustness: bad trial bounds");
  SolveResult sat = solve(instance, params.solver_budget);
  if (!sat.satisfiable)
    throw BackboneUndefined("estimate_robustness: instance is unsatisfiable");
  Backbone backbone = compute_backbone(instance, params.solver_budget);
  if (backbone.empty())
    throw RobustnessUndefined("estimate_robustness: backbone is empty");
  const Assignment &witness = *sat.witness;

  RobustnessEstimate est;
  est.results.reserve(static_cast<size_t>(params.max_trials));
  est.halved_sizes.reserve(static_cast<size_t>(params.max_trials));

  auto run_block = [&](int from, int to) {
    est.results.resize(static_cast<size_t>(to));
    est.halved_sizes.resize(static_cast<size_t>(to));
    parallel_for(params.workers, to - from, [&](int off) {
      int i = from + off;
      Rng rng(derive_seed(rng_seed, static_cast<uint64_t>(i)));
      int halved = 0;
      est.results[static_cast<size_t>(i)] = trial_impl(
          instance, backbone, witness, rng, &halved, params.solver_budget);
      est.halved_sizes[static_cast<size_t>(i)] = halved;
    });
  };

  int done = 0;
  int target = params.min_trials;
  for (;;) {
    run_block(done, target);
    done = target;
    double sum = 0;
    for (int v : est.results)
      sum += v;
    double mean = sum / done;
    double ss = 0;
    for (int v : est.results)
      ss += (v - mean) * (v - mean);
    double sd = done > 1 ? std::sqrt(ss / (done - 1)) : 0.0;
    est.mean = mean;
    est.std_error = sd / std::sqrt(static_cast<double>(done));
    est.trials = done;
    if (done >= params.min_trials && est.std_error < params.rel_se * mean) {
      est.converged = true;
      break;
    }
    if (done >= params.max_trials) {
      est.converged = false;
      break;
    }
    target = std::min(done + params.check_stride, params.max_trials);
  }
  return est;
}

Clause build_d_clause(const Backbone &backbone) {
  Clause d;
  d.reserve(static_cast<size_t>(backbone.size()));
  for (Lit l : backbone.literals())
    d.push_back(l.negated());
  return d;
}

RemovedInstance find_mus(const CnfInstance &instance, Rng &rng,
                         std::optional<int> protected_index,
                         const SolverBudget &budget) {
  if (protected_index &&
      (*protected_index < 0 || *protected_index >= instance.num_clauses()))
    throw std::out_of_range("find_mus: protected index out of range");
  if (solve(instance, budget).satisfiable)
    throw std::invalid_argument("find_mus: instance is satisfiable");
  std::vector<int> order(static_cast<size_t>(instance.num_clauses()));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<uint8_t> removed(static_cast<size_t>(instance.num_clauses()), 0);
  for (int idx : order) {
    if (protected_index && idx == *protected_index)
      continue;
    removed[static_cast<size_t>(idx)] = 1;
    if (solve(masked_instance(instance, removed), budget).satisfiable)
      removed[static_cast<size_t>(idx)] = 0; // necessary, keep it
  }
  std::vector<int> to_remove;
  for (int i = 0; i < instance.num_clauses(); ++i)
    if (removed[static_cast<size_t>(i)])
      to_remove.push_back(i);
  return remove_clauses(instance, to_remove);
}

BmsResult find_bms(const CnfInstance &instance, Rng &rng,
                   const SolverBudget &budget) {
  Backbone backbone = compute_backbone(instance, budget); // throws on unsat
  Clause d = build_d_clause(backbone);
  std::vector<Clause> ext = instance.clauses();
  ext.push_back(std::move(d));
  CnfInstance extended(instance.num_vars(), std::move(ext));
  int d_index = instance.num_clauses();
  RemovedInstance mus = find_mus(extended, rng, d_index, budget);

  std::vector<Clause> sub;
  std::vector<int> parents;
  for (size_t i = 0; i < mus.parent_index.size(); ++i)
    if (mus.parent_index[i] != d_index) {
      sub.push_back(mus.instance.clause(static_cast<int>(i)));
      parents.push_back(mus.parent_index[i]);
    }
  return {CnfInstance(instance.num_vars(), std::move(sub)), std::move(parents),
          std::move(backbone)};
}

RemovedInstance preserve_backbone_removal(const CnfInstance &instance,
                                          const BmsResult &bms, int m_r,
                                          Rng &rng) {
  std::vector<uint8_t> in_bms(static_cast<size_t>(instance.num_clauses()), 0);
  for (int p : bms.parent_indices)
    in_bms[static_cast<size_t>(p)] = 1;
  std::vector<int> eligible;
  for (int i = 0; i < instance.num_clauses(); ++i)
    if (!in_bms[static_cast<size_t>(i)])
      eligible.push_back(i);
  if (m_r < 0 || m_r > static_cast<int>(eligible.size()))
    throw std::invalid_argument(
        "preserve_backbone_removal: m_r exceeds removable clause count");
  rng.shuffle(eligible);
  eligible.resize(static_cast<size_t>(m_r));
  return remove_clauses(instance, eligible);
}

RemovedInstance random_removal(const CnfInstance &instance, int m_r, Rng &rng) {
  if (m_r < 0 || m_r > instance.num_clauses())
    throw std::invalid_argument("random_removal: m_r exceeds clause count");
  std::vector<int> indices(static_cast<size_t>(instance.num_clauses()));
  std::iota(indices.begin(), indices.end(), 0);
  rng.shuffle(indices);
  indices.resize(static_cast<size_t>(m_r));
  return remove_clauses(instance, indices);
}

ReduceBackboneResult reduce_backbone_removal(const CnfInstance &instance,
                                             int m_r, Rng &rng,
                                             const SolverBudget &budget) {
  SolveResult sat = solve(instance, budget);
  if (!sat.satisfiable)
    throw BackboneUndefined("reduce_backbone_removal: instance unsatisfiable");
  const Assignment &witness = *sat.witness;
  Backbone current = compute_backbone(instance, budget);

  std::vector<uint8_t> removed(static_cast<size_t>(instance.num_clauses()), 0);
  int removals = 0;
  while (removals < m_r && !current.empty()) {
    std::vector<int> eligible;
    std::vector<Backbone> shrunk;
    for (int i = 0; i < instance.num_clauses(); ++i) {
      if (removed[static_cast<size_t>(i)])
        continue;
      removed[static_cast<size_t>(i)] = 1;
      CnfInstance active = masked_instance(instance, removed);
      Backbone b =
          compute_backbone(active, current.literals(), &witness, budget);
      removed[static_cast<size_t>(i)] = 0;
      if (b.size() < current.size()) {
        eligible.push_back(i);
        shrunk.push_back(std::move(b));
      }
    }
    if (eligible.empty())
      break; // no single clause shrinks the backbone (e.g. duplicated support)
    size_t pick = static_cast<size_t>(rng.below(eligible.size()));
    removed[static_cast<size_t>(eligible[pick])] = 1;
    current = std::move(shrunk[pick]);
    ++removals;
  }
  std::vector<int> to_remove;
  for (int i = 0; i < instance.num_clauses(); ++i)
    if (removed[static_cast<size_t>(i)])
      to_remove.push_back(i);
  RemovedInstance r = remove_clauses(instance, to_remove);
  return {std::move(r.instance), std::move(r.parent_index), removals};
}

std::vector<int> backbone_contribution(const CnfInstance &instance,
                                       const SolverBudget &budget) {
  SolveResult sat = solve(instance, budget);
  if (!sat.satisfiable)
    throw BackboneUndefined("backbone_contribution: instance unsatisfiable");
  const Assignment &witness = *sat.witness;
  Backbone backbone = compute_backbone(instance, budget);
  std::vector<int> bc(static_cast<size_t>(instance.num_clauses()), 0);
  std::vector<uint8_t> removed(static_cast<size_t>(instance.num_clauses()), 0);
  for (int i = 0; i < instance.num_clauses(); ++i) {
    removed[static_cast<size_t>(i)] = 1;
    CnfInstance active = masked_instance(instance, removed);
    Backbone b =
        compute_backbone(active, backbone.literals(), &witness, budget);
    removed[static_cast<size_t>(i)] = 0;
    bc[static_cast<size_t>(i)] = backbone.size() - b.size();
  }
  return bc;
}

} // namespace satkit
