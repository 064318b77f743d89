#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "satkit/cnf.hpp"
#include "satkit/dpll.hpp"
#include "satkit/rng.hpp"

namespace satkit {

/// Stands in for "Max-flips infinite"; a run with this cap only ends by
/// finding a solution.
inline constexpr uint64_t kUnboundedFlips =
    std::numeric_limits<uint64_t>::max();

struct WsatParams {
  double noise_p = 0.55;
  /// Safety cap realizing the unbounded-flips setting; cap_exceeded is
  /// reported in the record, not thrown.
  uint64_t max_flips = 100'000'000;
  uint64_t rng_seed = 0;
  /// Restart mechanism; kept at 1 (off) for all headline experiments.
  int max_tries = 1;
  /// b values at which to record f_b and the assignment snapshot T_{f_b}.
  std::vector<int> probes;
  /// Count, for every state after a flip, each currently-unsatisfied clause.
  /// The initial random assignment T_0 is not counted.
  bool record_uf = false;
};

enum class RunTermination { solved, cap_exceeded };

/// One WSAT run's trajectory summary.
struct RunRecord {
  uint64_t run_length = 0; // flips to solution (f_0) when solved
  RunTermination terminated = RunTermination::solved;
  /// (b, f_b): flips to the first state with at most b unsatisfied clauses,
  /// sorted by descending b (the order crossings can occur in).
  std::vector<std::pair<int, uint64_t>> f_values;
  std::vector<std::pair<int, Assignment>> snapshots; // T_{f_b} per probe b
  std::vector<uint64_t> clause_unsat_counts;         // present iff record_uf

  std::optional<uint64_t> f_value(int b) const;
  const Assignment *snapshot(int b) const;
};

/// One-line JSON form of a run record (snapshots as signed literal arrays),
/// suitable for JSONL streams.
std::string to_json_line(const RunRecord &record);

/// WSAT with the SKC variable-selection strategy. One engine is bound to one
/// immutable instance and reusable across runs; a run confines all mutable
/// state to the engine, so distinct engines may run concurrently.
class WsatEngine {
public:
  explicit WsatEngine(const CnfInstance &instance);

  RunRecord run(const WsatParams &params, Rng &rng);

  // State-inspection surface, used by tests and by the selection oracle.
  void reset(const Assignment &initial);
  void reset_random(Rng &rng);
  int unsat_count() const { return static_cast<int>(unsat_list_.size()); }
  std::span<const int> unsat_clauses() const { return unsat_list_; }
  /// Number of clauses that would become unsatisfied if `var` were flipped.
  int breaks(int var) const { return break_count_[static_cast<size_t>(var)]; }
  Assignment assignment() const;
  void flip(int var);

  /// SKC (Fig. 2 semantics): a uniformly-chosen zero-break variable of the
  /// clause if one exists; otherwise a uniformly-random clause variable with
  /// probability noise_p, else a minimum-breaks variable, ties uniform.
  /// The clause must be unsatisfied (throws std::logic_error otherwise).
  int select_variable_skc(int clause_idx, double noise_p, Rng &rng);

private:
  void rebuild_state();
  int pick_unsat_clause(Rng &rng);

  const CnfInstance *instance_;
  int n_ = 0, m_ = 0;
  int empty_clauses_ = 0;
  std::vector<int> cl_begin_, cl_lits_; // flattened clauses (literal codes)
  std::vector<int> occ_begin_, occ_list_;
  std::vector<uint8_t> value_;   // 1-based truth values
  std::vector<int> num_true_;    // true literals per clause
  std::vector<int> crit_var_;    // sole satisfying variable when num_true==1
  std::vector<int> break_count_; // per variable
  std::vector<int> unsat_list_, unsat_pos_;
  std::vector<int> scratch_vars_, scratch_ties_;
};

/// Convenience wrapper: fresh engine, Rng seeded from params.rng_seed.
RunRecord wsat_run(const CnfInstance &instance, const WsatParams &params);

struct CostParams {
  int runs = 1000;
  WsatParams wsat; // rng_seed is the root; run i draws derive_seed(root, i)
  int workers = 1;
  /// Throw BudgetExhausted when any run hits the flip cap instead of
  /// recording it.
  bool fail_on_cap = false;
};

/// Per-instance cost summary over R independent runs.
struct InstanceCostStats {
  int runs = 0;
  double cost = 0.0; // exact median of the R run lengths
  double q25 = 0.0, q75 = 0.0;
  int cap_exceeded_runs = 0;
  /// Aggregates of f_5 and hdns(T_{f_5}) across runs; NaN when probe 5 was
  /// not requested (or no solution set was supplied for hdns).
  double median_f5, mean_f5, mean_hdns_f5;
  /// Mean over runs of per-clause unsatisfaction counts; empty unless
  /// record_uf.
  std::vector<double> uf;
  std::vector<double> run_lengths; // per run, index == run number
};

/// R runs with per-run derived seeds; bit-identical results for any worker
/// count. `solutions`, when given and complete, enables the hdns aggregate.
InstanceCostStats measure_cost(const CnfInstance &instance,
                               const CostParams &params,
                               const SolutionSet *solutions = nullptr);

} // namespace satkit
