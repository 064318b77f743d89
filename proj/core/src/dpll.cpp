#include "satkit/dpll.hpp"

#include <algorithm>
#include <bit>
#include <climits>
#include <stdexcept>

#include "satkit/errors.hpp"

namespace satkit {

void SolutionSet::add(const Assignment &a) {
  size_t base = bits_.size();
  bits_.resize(base + words_, 0);
  for (int v = 1; v <= num_vars_; ++v)
    if (a.value(v))
      bits_[base + static_cast<size_t>(v - 1) / 64] |=
          uint64_t{1} << ((v - 1) % 64);
}

Assignment SolutionSet::assignment(size_t i) const {
  Assignment a(num_vars_);
  const uint64_t *row = bits_.data() + i * words_;
  for (int v = 1; v <= num_vars_; ++v)
    if ((row[static_cast<size_t>(v - 1) / 64] >> ((v - 1) % 64)) & 1)
      a.set(v, true);
  return a;
}

int SolutionSet::min_hamming_to(const Assignment &t) const {
  std::vector<uint64_t> packed(words_, 0);
  for (int v = 1; v <= num_vars_; ++v)
    if (t.value(v))
      packed[static_cast<size_t>(v - 1) / 64] |= uint64_t{1} << ((v - 1) % 64);
  int best = INT_MAX;
  for (size_t row = 0; row * words_ < bits_.size(); ++row) {
    const uint64_t *p = bits_.data() + row * words_;
    int d = 0;
    for (size_t w = 0; w < words_; ++w)
      d += std::popcount(p[w] ^ packed[w]);
    best = std::min(best, d);
  }
  return best;
}

namespace {

inline int lit_slot(int code) {
  return code > 0 ? 2 * (code - 1) : 2 * (-code - 1) + 1;
}

uint64_t checked_add(uint64_t a, uint64_t b) {
  if (a > UINT64_MAX - b)
    throw Error("count_solutions: model count exceeds uint64 range");
  return a + b;
}

uint64_t checked_pow2(int f) {
  if (f >= 64)
    throw Error("count_solutions: model count exceeds uint64 range");
  return uint64_t{1} << f;
}

} // namespace

struct DpllSolver::Impl {
  const CnfInstance &inst;
  SolverBudget budget;
  SolverStats &stats;

  int n, m;
  std::vector<int> cl_begin; // m+1 offsets into cl_lits
  std::vector<int> cl_lits;  // literal codes
  std::vector<int> occ_begin; // 2n+1 offsets into occ_list
  std::vector<int> occ_list;  // clause indices per literal slot

  std::vector<int8_t> value;       // 1-based, 0 unassigned
  std::vector<int> true_count;     // per clause
  std::vector<int> unassigned_cnt; // per clause
  std::vector<int> active_occ;     // per literal slot, occs in active clauses
  std::vector<int> trail;          // assigned literal codes
  size_t qhead = 0;
  bool has_empty_clause = false;
  uint64_t decisions_left = 0;

  Impl(const CnfInstance &instance, SolverBudget b, SolverStats &s)
      : inst(instance), budget(b), stats(s), n(instance.num_vars()),
        m(instance.num_clauses()) {
    cl_begin.reserve(static_cast<size_t>(m) + 1);
    cl_begin.push_back(0);
    for (const Clause &c : inst.clauses()) {
      if (c.empty())
        has_empty_clause = true;
      for (Lit l : c)
        cl_lits.push_back(l.dimacs());
      cl_begin.push_back(static_cast<int>(cl_lits.size()));
    }
    std::vector<int> counts(static_cast<size_t>(2 * n), 0);
    for (int code : cl_lits)
      counts[static_cast<size_t>(lit_slot(code))]++;
    occ_begin.assign(static_cast<size_t>(2 * n) + 1, 0);
    for (int s2 = 0; s2 < 2 * n; ++s2)
      occ_begin[static_cast<size_t>(s2) + 1] =
          occ_begin[static_cast<size_t>(s2)] + counts[static_cast<size_t>(s2)];
    occ_list.resize(cl_lits.size());
    std::vector<int> fill(occ_begin.begin(), occ_begin.end() - 1);
    for (int ci = 0; ci < m; ++ci)
      for (int k = cl_begin[ci]; k < cl_begin[ci + 1]; ++k) {
        int s2 = lit_slot(cl_lits[static_cast<size_t>(k)]);
        occ_list[static_cast<size_t>(fill[static_cast<size_t>(s2)]++)] = ci;
      }
    value.assign(static_cast<size_t>(n) + 1, 0);
    true_count.assign(static_cast<size_t>(m), 0);
    unassigned_cnt.resize(static_cast<size_t>(m));
    for (int ci = 0; ci < m; ++ci)
      unassigned_cnt[static_cast<size_t>(ci)] = cl_begin[ci + 1] - cl_begin[ci];
    active_occ.assign(counts.begin(), counts.end());
    trail.reserve(static_cast<size_t>(n));
  }

  int8_t lit_value(int code) const {
    int8_t v = value[static_cast<size_t>(code > 0 ? code : -code)];
    return code > 0 ? v : static_cast<int8_t>(-v);
  }

  void deactivate(int ci) {
    for (int k = cl_begin[ci]; k < cl_begin[ci + 1]; ++k)
      active_occ[static_cast<size_t>(lit_slot(cl_lits[static_cast<size_t>(k)]))]--;
  }
  void reactivate(int ci) {
    for (int k = cl_begin[ci]; k < cl_begin[ci + 1]; ++k)
      active_occ[static_cast<size_t>(lit_slot(cl_lits[static_cast<size_t>(k)]))]++;
  }

  void enqueue(int code) {
    value[static_cast<size_t>(code > 0 ? code : -code)] =
        static_cast<int8_t>(code > 0 ? 1 : -1);
    trail.push_back(code);
  }

  std::span<const int> occs(int slot2) const {
    return {occ_list.data() + occ_begin[static_cast<size_t>(slot2)],
            occ_list.data() + occ_begin[static_cast<size_t>(slot2) + 1]};
  }

  bool propagate() {
    while (qhead < trail.size()) {
      int code = trail[qhead++];
      stats.propagations++;
      // Both occurrence loops always run to completion so that undo_to can
      // reverse exactly one full update per processed trail entry.
      bool conflict = false;
      for (int ci : occs(lit_slot(code))) {
        unassigned_cnt[static_cast<size_t>(ci)]--;
        if (++true_count[static_cast<size_t>(ci)] == 1)
          deactivate(ci);
      }
      for (int ci : occs(lit_slot(-code))) {
        unassigned_cnt[static_cast<size_t>(ci)]--;
        if (!conflict && true_count[static_cast<size_t>(ci)] == 0) {
          if (unassigned_cnt[static_cast<size_t>(ci)] == 0) {
            if (!clause_has_pending_true(ci))
              conflict = true;
          } else if (unassigned_cnt[static_cast<size_t>(ci)] == 1) {
            if (!enqueue_unit(ci))
              conflict = true;
          }
        }
      }
      if (conflict)
        return false;
    }
    return true;
  }

  // Counters lag behind literals enqueued but not yet propagated, so a
  // seemingly conflicting or unit clause may in fact already be satisfied.
  bool clause_has_pending_true(int ci) const {
    for (int k = cl_begin[ci]; k < cl_begin[ci + 1]; ++k)
      if (lit_value(cl_lits[static_cast<size_t>(k)]) > 0)
        return true;
    return false;
  }

  bool enqueue_unit(int ci) {
    int unit = 0;
    for (int k = cl_begin[ci]; k < cl_begin[ci + 1]; ++k) {
      int code = cl_lits[static_cast<size_t>(k)];
      int8_t v = lit_value(code);
      if (v > 0)
        return true; // satisfied by a pending literal
      if (v == 0)
        unit = code;
    }
    if (unit == 0)
      return false; // all literals falsified by pending assignments
    enqueue(unit);
    return true;
  }

  void undo_to(size_t mark) {
    while (trail.size() > mark) {
      size_t idx = trail.size() - 1;
      int code = trail.back();
      trail.pop_back();
      if (idx < qhead) { // counters were updated only for processed entries
        for (int ci : occs(lit_slot(code))) {
          if (--true_count[static_cast<size_t>(ci)] == 0)
            reactivate(ci);
          unassigned_cnt[static_cast<size_t>(ci)]++;
        }
        for (int ci : occs(lit_slot(-code)))
          unassigned_cnt[static_cast<size_t>(ci)]++;
      }
      value[static_cast<size_t>(code > 0 ? code : -code)] = 0;
    }
    qhead = trail.size();
  }

  void count_decision() {
    stats.decisions++;
    if (decisions_left-- == 0)
      throw BudgetExhausted("solver decision budget exhausted");
  }

  /// Unassigned variable with the most occurrences in active clauses, or 0
  /// when every clause is satisfied.
  int pick_branch_var() const {
    int best = 0, best_score = 0;
    for (int v = 1; v <= n; ++v) {
      if (value[static_cast<size_t>(v)] != 0)
        continue;
      int score = active_occ[static_cast<size_t>(2 * (v - 1))] +
                  active_occ[static_cast<size_t>(2 * (v - 1) + 1)];
      if (score > best_score) {
        best_score = score;
        best = v;
      }
    }
    return best;
  }

  // Assigns every pure literal found, to fixpoint. Decision queries only.
  bool assign_pure_literals() {
    bool any = true;
    while (any) {
      any = false;
      for (int v = 1; v <= n; ++v) {
        if (value[static_cast<size_t>(v)] != 0)
          continue;
        int pos = active_occ[static_cast<size_t>(2 * (v - 1))];
        int neg = active_occ[static_cast<size_t>(2 * (v - 1) + 1)];
        if (pos > 0 && neg == 0) {
          enqueue(v);
          any = true;
        } else if (neg > 0 && pos == 0) {
          enqueue(-v);
          any = true;
        }
      }
      if (any && !propagate())
        return false;
    }
    return true;
  }

  bool solve_rec() {
    if (!propagate())
      return false;
    if (!assign_pure_literals())
      return false;
    int v = pick_branch_var();
    if (v == 0)
      return true;
    count_decision();
    size_t mark = trail.size();
    enqueue(v);
    if (solve_rec())
      return true;
    undo_to(mark);
    enqueue(-v);
    if (solve_rec())
      return true;
    undo_to(mark);
    return false;
  }

  uint64_t count_rec() {
    if (!propagate())
      return 0;
    int v = pick_branch_var();
    if (v == 0)
      return checked_pow2(n - static_cast<int>(trail.size()));
    count_decision();
    size_t mark = trail.size();
    enqueue(v);
    uint64_t a = count_rec();
    undo_to(mark);
    enqueue(-v);
    uint64_t b = count_rec();
    undo_to(mark);
    return checked_add(a, b);
  }

  Assignment current_total_assignment() const {
    Assignment a(n);
    for (int v = 1; v <= n; ++v)
      a.set(v, value[static_cast<size_t>(v)] > 0);
    return a;
  }

  // Returns false once the cap is hit and at least one more solution exists.
  bool enumerate_rec(uint64_t cap, SolutionSet &out) {
    if (!propagate())
      return true;
    int v = pick_branch_var();
    if (v == 0) {
      std::vector<int> free_vars;
      for (int w = 1; w <= n; ++w)
        if (value[static_cast<size_t>(w)] == 0)
          free_vars.push_back(w);
      size_t f = free_vars.size();
      // With 64+ free variables the cap (< 2^64) is hit long before the
      // high positions would matter, so only the low 64 bits drive them.
      uint64_t combos =
          f >= 64 ? UINT64_MAX : (uint64_t{1} << f); // cap bounds the loop
      Assignment a = current_total_assignment();
      for (uint64_t bits = 0; bits < combos; ++bits) {
        for (size_t i = 0; i < f && i < 64; ++i)
          a.set(free_vars[i], (bits >> i) & 1);
        if (out.size() == cap) {
          out.mark_truncated();
          return false;
        }
        if (!evaluate(inst, a).satisfied())
          throw std::logic_error("internal: enumerated non-solution");
        out.add(a);
      }
      return true;
    }
    count_decision();
    size_t mark = trail.size();
    enqueue(v);
    bool go = enumerate_rec(cap, out);
    undo_to(mark);
    if (!go)
      return false;
    enqueue(-v);
    go = enumerate_rec(cap, out);
    undo_to(mark);
    return go;
  }

  // Assigns assumptions; returns false on immediate inconsistency.
  bool apply_assumptions(std::span<const Lit> assumptions) {
    for (Lit l : assumptions) {
      int8_t v = lit_value(l.dimacs());
      if (v < 0)
        return false;
      if (v == 0)
        enqueue(l.dimacs());
      if (!propagate())
        return false;
    }
    return true;
  }
};

DpllSolver::DpllSolver(const CnfInstance &instance, SolverBudget budget)
    : instance_(instance), budget_(budget),
      impl_(new Impl(instance, budget, stats_)) {}

DpllSolver::~DpllSolver() { delete impl_; }

SolveResult DpllSolver::solve(std::span<const Lit> assumptions) {
  stats_.calls++;
  impl_->decisions_left = budget_.max_decisions;
  if (impl_->has_empty_clause)
    return {false, std::nullopt};
  try {
    bool sat = impl_->apply_assumptions(assumptions) && impl_->solve_rec();
    if (!sat) {
      impl_->undo_to(0);
      return {false, std::nullopt};
    }
    Assignment w = impl_->current_total_assignment();
    impl_->undo_to(0);
    if (!evaluate(instance_, w).satisfied())
      throw std::logic_error("internal: witness failed verification");
    for (Lit l : assumptions)
      if (!w.satisfies(l))
        throw std::logic_error("internal: witness violates assumption");
    return {true, std::move(w)};
  } catch (...) {
    impl_->undo_to(0);
    throw;
  }
}

uint64_t DpllSolver::count_solutions() {
  stats_.calls++;
  impl_->decisions_left = budget_.max_decisions;
  if (impl_->has_empty_clause)
    return 0;
  try {
    uint64_t c = impl_->count_rec();
    impl_->undo_to(0);
    return c;
  } catch (...) {
    impl_->undo_to(0);
    throw;
  }
}

SolutionSet DpllSolver::enumerate_solutions(uint64_t cap) {
  if (cap < 1)
    throw std::invalid_argument("enumerate_solutions: cap must be >= 1");
  stats_.calls++;
  impl_->decisions_left = budget_.max_decisions;
  SolutionSet out(instance_.num_vars(), cap);
  if (impl_->has_empty_clause)
    return out;
  try {
    impl_->enumerate_rec(cap, out);
    impl_->undo_to(0);
    return out;
  } catch (...) {
    impl_->undo_to(0);
    throw;
  }
}

SolveResult solve(const CnfInstance &instance, const SolverBudget &budget,
                  SolverStats *stats) {
  DpllSolver s(instance, budget);
  SolveResult r = s.solve();
  if (stats)
    *stats = s.stats();
  return r;
}

uint64_t count_solutions(const CnfInstance &instance,
                         const SolverBudget &budget, SolverStats *stats) {
  DpllSolver s(instance, budget);
  uint64_t c = s.count_solutions();
  if (stats)
    *stats = s.stats();
  return c;
}

SolutionSet enumerate_solutions(const CnfInstance &instance, uint64_t cap,
                                const SolverBudget &budget,
                                SolverStats *stats) {
  DpllSolver s(instance, budget);
  SolutionSet out = s.enumerate_solutions(cap);
  if (stats)
    *stats = s.stats();
  return out;
}

namespace {

Backbone backbone_impl(DpllSolver &solver, const std::vector<Lit> *restrict_to,
                       const Assignment *witness_hint) {
  const CnfInstance &inst = solver.instance();
  Assignment witness;
  bool have_witness = false;
  if (witness_hint && witness_hint->num_vars() == inst.num_vars() &&
      evaluate(inst, *witness_hint).satisfied()) {
    witness = *witness_hint;
    have_witness = true;
  }
  if (!have_witness) {
    SolveResult r = solver.solve();
    if (!r.satisfiable)
      throw BackboneUndefined("compute_backbone: instance is unsatisfiable");
    witness = std::move(*r.witness);
  }

  // Only literals true in a solution can be entailed.
  std::vector<Lit> cand;
  if (restrict_to) {
    for (Lit l : *restrict_to)
      if (witness.satisfies(l))
        cand.push_back(l);
  } else {
    cand.reserve(static_cast<size_t>(inst.num_vars()));
    for (int v = 1; v <= inst.num_vars(); ++v)
      cand.push_back(witness.value(v) ? Lit::positive(v) : Lit::negative(v));
  }

  std::vector<uint8_t> dropped(cand.size(), 0);
  std::vector<Lit> confirmed;
  for (size_t i = 0; i < cand.size(); ++i) {
    if (dropped[i])
      continue;
    Lit neg = cand[i].negated();
    SolveResult r = solver.solve(std::span<const Lit>(&neg, 1));
    if (!r.satisfiable) {
      confirmed.push_back(cand[i]);
    } else {
      // Every literal the counter-model falsifies is not entailed.
      const Assignment &model = *r.witness;
      for (size_t j = i; j < cand.size(); ++j)
        if (!dropped[j] && !model.satisfies(cand[j]))
          dropped[j] = 1;
    }
  }
  return Backbone::from_literals(std::move(confirmed));
}

} // namespace

Backbone compute_backbone(const CnfInstance &instance,
                          const SolverBudget &budget, SolverStats *stats) {
  DpllSolver solver(instance, budget);
  Backbone b = backbone_impl(solver, nullptr, nullptr);
  if (stats)
    *stats = solver.stats();
  return b;
}

Backbone compute_backbone(const CnfInstance &instance,
                          std::span<const Lit> candidates,
                          const Assignment *witness_hint,
                          const SolverBudget &budget, SolverStats *stats) {
  DpllSolver solver(instance, budget);
  std::vector<Lit> cand(candidates.begin(), candidates.end());
  Backbone b = backbone_impl(solver, &cand, witness_hint);
  if (stats)
    *stats = solver.stats();
  return b;
}

int hdns(const Assignment &t, const SolutionSet &solutions) {
  if (!solutions.complete())
    throw std::invalid_argument("hdns: solution set is truncated");
  if (solutions.empty())
    throw std::invalid_argument("hdns: solution set is empty");
  if (t.num_vars() != solutions.num_vars())
    throw std::invalid_argument("hdns: variable-count mismatch");
  return solutions.min_hamming_to(t);
}

} // namespace satkit
