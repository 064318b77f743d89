#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "satkit/cnf.hpp"

namespace satkit {

struct SolverBudget {
  /// Decision-node cap per solver call; exceeding it throws BudgetExhausted,
  /// never a silent wrong answer.
  uint64_t max_decisions = 100'000'000;
};

struct SolverStats {
  uint64_t calls = 0;
  uint64_t decisions = 0;
  uint64_t propagations = 0;
};

struct SolveResult {
  bool satisfiable = false;
  std::optional<Assignment> witness; // present iff satisfiable, verified
};

/// Solutions of an instance, bit-packed row per solution for fast Hamming
/// scans. Safe for concurrent reads after construction.
class SolutionSet {
public:
  SolutionSet() = default;
  SolutionSet(int num_vars, uint64_t cap)
      : num_vars_(num_vars), cap_(cap),
        words_(static_cast<size_t>((num_vars + 63) / 64)) {}

  int num_vars() const { return num_vars_; }
  uint64_t cap() const { return cap_; }
  bool complete() const { return complete_; }
  void mark_truncated() { complete_ = false; }
  size_t size() const { return words_ ? bits_.size() / words_ : 0; }
  bool empty() const { return bits_.empty(); }

  void add(const Assignment &a);
  Assignment assignment(size_t i) const;

  /// Minimum Hamming distance from t to any stored solution.
  int min_hamming_to(const Assignment &t) const;

private:
  int num_vars_ = 0;
  uint64_t cap_ = 0;
  size_t words_ = 0;
  bool complete_ = true;
  std::vector<uint64_t> bits_; // row-major, words_ words per solution
};

/// Recursive DPLL with unit propagation; pure-literal elimination is applied
/// on decision queries only (it is unsound for counting and enumeration).
/// Branches on the unassigned variable occurring most often in still-active
/// clauses, trying true first. A solver is bound to one immutable instance
/// and may be reused across many queries; queries themselves are sequential.
class DpllSolver {
public:
  explicit DpllSolver(const CnfInstance &instance, SolverBudget budget = {});
  ~DpllSolver();
  DpllSolver(const DpllSolver &) = delete;
  DpllSolver &operator=(const DpllSolver &) = delete;

  /// Sound and complete; the witness is re-checked against the instance
  /// before returning. Assumptions constrain the search (used for entailment
  /// tests); unsatisfiable-under-assumptions reports satisfiable == false.
  SolveResult solve(std::span<const Lit> assumptions = {});

  /// Exact model count. Throws Error if the count would overflow uint64.
  uint64_t count_solutions();

  /// Every solution when the count fits the cap (complete() true), otherwise
  /// exactly `cap` solutions with complete() false. Each emitted solution is
  /// verified. cap must be >= 1.
  SolutionSet enumerate_solutions(uint64_t cap);

  const CnfInstance &instance() const { return instance_; }
  const SolverStats &stats() const { return stats_; }

private:
  struct Impl;
  const CnfInstance &instance_;
  SolverBudget budget_;
  SolverStats stats_;
  Impl *impl_;
};

SolveResult solve(const CnfInstance &instance, const SolverBudget &budget = {},
                  SolverStats *stats = nullptr);
uint64_t count_solutions(const CnfInstance &instance,
                         const SolverBudget &budget = {},
                         SolverStats *stats = nullptr);
SolutionSet enumerate_solutions(const CnfInstance &instance, uint64_t cap,
                                const SolverBudget &budget = {},
                                SolverStats *stats = nullptr);

/// The set of literals entailed by a satisfiable instance. Seeds candidates
/// from one witness (only literals true in some solution can be entailed),
/// then runs one entailment test per surviving candidate, pruning with every
/// counter-model found along the way. Throws BackboneUndefined on an
/// unsatisfiable instance.
Backbone compute_backbone(const CnfInstance &instance,
                          const SolverBudget &budget = {},
                          SolverStats *stats = nullptr);

/// Restricted variant: only literals in `candidates` are considered. Callers
/// exploit backbone monotonicity (clause removal never grows the backbone) by
/// passing the parent's backbone. `witness_hint`, when given and actually
/// satisfying, skips the initial solve.
Backbone compute_backbone(const CnfInstance &instance,
                          std::span<const Lit> candidates,
                          const Assignment *witness_hint = nullptr,
                          const SolverBudget &budget = {},
                          SolverStats *stats = nullptr);

/// Hamming distance from t to the nearest solution. Requires a complete,
/// nonempty solution set (throws std::invalid_argument otherwise).
int hdns(const Assignment &t, const SolutionSet &solutions);

} // namespace satkit
