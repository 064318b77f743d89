#include "satkit/wsat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "satkit/errors.hpp"
#include "satkit/stats.hpp"

namespace satkit {

std::string to_json_line(const RunRecord &record) {
  nlohmann::json j;
  j["run_length"] = record.run_length;
  j["terminated"] = record.terminated == RunTermination::solved
                        ? "solved"
                        : "cap_exceeded";
  nlohmann::json f = nlohmann::json::object();
  for (auto &[b, flips] : record.f_values)
    f[std::to_string(b)] = flips;
  j["f_values"] = std::move(f);
  nlohmann::json snaps = nlohmann::json::object();
  for (auto &[b, a] : record.snapshots) {
    std::vector<int> lits;
    lits.reserve(static_cast<size_t>(a.num_vars()));
    for (int v = 1; v <= a.num_vars(); ++v)
      lits.push_back(a.value(v) ? v : -v);
    snaps[std::to_string(b)] = std::move(lits);
  }
  j["snapshots"] = std::move(snaps);
  if (!record.clause_unsat_counts.empty())
    j["clause_unsat_counts"] = record.clause_unsat_counts;
  return j.dump();
}

std::optional<uint64_t> RunRecord::f_value(int b) const {
  for (auto &[probe, flips] : f_values)
    if (probe == b)
      return flips;
  return std::nullopt;
}

const Assignment *RunRecord::snapshot(int b) const {
  for (auto &[probe, a] : snapshots)
    if (probe == b)
      return &a;
  return nullptr;
}

namespace {
inline int lit_slot(int code) {
  return code > 0 ? 2 * (code - 1) : 2 * (-code - 1) + 1;
}
} // namespace

WsatEngine::WsatEngine(const CnfInstance &instance) : instance_(&instance) {
  n_ = instance.num_vars();
  m_ = instance.num_clauses();
  cl_begin_.reserve(static_cast<size_t>(m_) + 1);
  cl_begin_.push_back(0);
  for (const Clause &c : instance.clauses()) {
    if (c.empty())
      ++empty_clauses_;
    for (Lit l : c)
      cl_lits_.push_back(l.dimacs());
    cl_begin_.push_back(static_cast<int>(cl_lits_.size()));
  }
  std::vector<int> counts(static_cast<size_t>(2 * n_), 0);
  for (int code : cl_lits_)
    counts[static_cast<size_t>(lit_slot(code))]++;
  occ_begin_.assign(static_cast<size_t>(2 * n_) + 1, 0);
  for (int s = 0; s < 2 * n_; ++s)
    occ_begin_[static_cast<size_t>(s) + 1] =
        occ_begin_[static_cast<size_t>(s)] + counts[static_cast<size_t>(s)];
  occ_list_.resize(cl_lits_.size());
  std::vector<int> fill(occ_begin_.begin(), occ_begin_.end() - 1);
  for (int ci = 0; ci < m_; ++ci)
    for (int k = cl_begin_[ci]; k < cl_begin_[ci + 1]; ++k) {
      int s = lit_slot(cl_lits_[static_cast<size_t>(k)]);
      occ_list_[static_cast<size_t>(fill[static_cast<size_t>(s)]++)] = ci;
    }
  value_.assign(static_cast<size_t>(n_) + 1, 0);
  num_true_.assign(static_cast<size_t>(m_), 0);
  crit_var_.assign(static_cast<size_t>(m_), 0);
  break_count_.assign(static_cast<size_t>(n_) + 1, 0);
  unsat_pos_.assign(static_cast<size_t>(m_), -1);
  rebuild_state();
}

void WsatEngine::rebuild_state() {
  std::fill(num_true_.begin(), num_true_.end(), 0);
  std::fill(crit_var_.begin(), crit_var_.end(), 0);
  std::fill(break_count_.begin(), break_count_.end(), 0);
  std::fill(unsat_pos_.begin(), unsat_pos_.end(), -1);
  unsat_list_.clear();
  for (int ci = 0; ci < m_; ++ci) {
    int trues = 0, crit = 0;
    for (int k = cl_begin_[ci]; k < cl_begin_[ci + 1]; ++k) {
      int code = cl_lits_[static_cast<size_t>(k)];
      int var = code > 0 ? code : -code;
      if ((value_[static_cast<size_t>(var)] != 0) == (code > 0)) {
        ++trues;
        crit = var;
      }
    }
    num_true_[static_cast<size_t>(ci)] = trues;
    if (trues == 1) {
      crit_var_[static_cast<size_t>(ci)] = crit;
      break_count_[static_cast<size_t>(crit)]++;
    } else if (trues == 0) {
      unsat_pos_[static_cast<size_t>(ci)] = static_cast<int>(unsat_list_.size());
      unsat_list_.push_back(ci);
    }
  }
}

void WsatEngine::reset(const Assignment &initial) {
  if (initial.num_vars() != n_)
    throw std::invalid_argument("wsat reset: assignment size mismatch");
  for (int v = 1; v <= n_; ++v)
    value_[static_cast<size_t>(v)] = initial.value(v) ? 1 : 0;
  rebuild_state();
}

void WsatEngine::reset_random(Rng &rng) {
  for (int v = 1; v <= n_; ++v)
    value_[static_cast<size_t>(v)] = rng.coin() ? 1 : 0;
  rebuild_state();
}

Assignment WsatEngine::assignment() const {
  Assignment a(n_);
  for (int v = 1; v <= n_; ++v)
    a.set(v, value_[static_cast<size_t>(v)] != 0);
  return a;
}

void WsatEngine::flip(int var) {
  value_[static_cast<size_t>(var)] ^= 1;
  bool now = value_[static_cast<size_t>(var)] != 0;
  int gained = now ? var : -var; // literal that became true
  for (int ci : std::span<const int>(
           occ_list_.data() + occ_begin_[static_cast<size_t>(lit_slot(gained))],
           occ_list_.data() +
               occ_begin_[static_cast<size_t>(lit_slot(gained)) + 1])) {
    int t = ++num_true_[static_cast<size_t>(ci)];
    if (t == 1) {
      int pos = unsat_pos_[static_cast<size_t>(ci)];
      int last = unsat_list_.back();
      unsat_list_[static_cast<size_t>(pos)] = last;
      unsat_pos_[static_cast<size_t>(last)] = pos;
      unsat_list_.pop_back();
      unsat_pos_[static_cast<size_t>(ci)] = -1;
      crit_var_[static_cast<size_t>(ci)] = var;
      break_count_[static_cast<size_t>(var)]++;
    } else if (t == 2) {
      break_count_[static_cast<size_t>(crit_var_[static_cast<size_t>(ci)])]--;
      crit_var_[static_cast<size_t>(ci)] = 0;
    }
  }
  int lost = now ? -var : var; // literal that became false
  for (int ci : std::span<const int>(
           occ_list_.data() + occ_begin_[static_cast<size_t>(lit_slot(lost))],
           occ_list_.data() +
               occ_begin_[static_cast<size_t>(lit_slot(lost)) + 1])) {
    int t = --num_true_[static_cast<size_t>(ci)];
    if (t == 0) {
      break_count_[static_cast<size_t>(var)]--; // var was critical here
      crit_var_[static_cast<size_t>(ci)] = 0;
      unsat_pos_[static_cast<size_t>(ci)] = static_cast<int>(unsat_list_.size());
      unsat_list_.push_back(ci);
    } else if (t == 1) {
      // Find the remaining satisfying literal.
      for (int k = cl_begin_[ci]; k < cl_begin_[ci + 1]; ++k) {
        int code = cl_lits_[static_cast<size_t>(k)];
        int w = code > 0 ? code : -code;
        if ((value_[static_cast<size_t>(w)] != 0) == (code > 0)) {
          crit_var_[static_cast<size_t>(ci)] = w;
          break_count_[static_cast<size_t>(w)]++;
          break;
        }
      }
    }
  }
}

int WsatEngine::select_variable_skc(int clause_idx, double noise_p, Rng &rng) {
  if (num_true_[static_cast<size_t>(clause_idx)] != 0)
    throw std::logic_error("select_variable_skc: clause is satisfied");
  // Distinct variables mentioned in the clause.
  scratch_vars_.clear();
  for (int k = cl_begin_[clause_idx]; k < cl_begin_[clause_idx + 1]; ++k) {
    int code = cl_lits_[static_cast<size_t>(k)];
    int var = code > 0 ? code : -code;
    if (std::find(scratch_vars_.begin(), scratch_vars_.end(), var) ==
        scratch_vars_.end())
      scratch_vars_.push_back(var);
  }
  scratch_ties_.clear();
  for (int var : scratch_vars_)
    if (break_count_[static_cast<size_t>(var)] == 0)
      scratch_ties_.push_back(var);
  if (!scratch_ties_.empty())
    return scratch_ties_[rng.below(scratch_ties_.size())];
  if (rng.chance(noise_p))
    return scratch_vars_[rng.below(scratch_vars_.size())];
  int best = break_count_[static_cast<size_t>(scratch_vars_[0])];
  for (int var : scratch_vars_)
    best = std::min(best, break_count_[static_cast<size_t>(var)]);
  for (int var : scratch_vars_)
    if (break_count_[static_cast<size_t>(var)] == best)
      scratch_ties_.push_back(var);
  return scratch_ties_[rng.below(scratch_ties_.size())];
}

int WsatEngine::pick_unsat_clause(Rng &rng) {
  for (;;) {
    int ci = unsat_list_[rng.below(unsat_list_.size())];
    if (cl_begin_[ci + 1] > cl_begin_[ci])
      return ci;
    // The drawn clause is empty and can never be flipped satisfied. When
    // every unsatisfied clause is empty the run is stuck; otherwise redraw,
    // which keeps the selection uniform over the flippable ones.
    if (static_cast<int>(unsat_list_.size()) <= empty_clauses_) {
      bool all_empty = true;
      for (int c : unsat_list_)
        if (cl_begin_[c + 1] > cl_begin_[c]) {
          all_empty = false;
          break;
        }
      if (all_empty)
        throw UnflippableClause(
            "wsat: only empty clauses remain unsatisfied");
    }
  }
}

RunRecord WsatEngine::run(const WsatParams &params, Rng &rng) {
  if (params.noise_p < 0.0 || params.noise_p > 1.0)
    throw std::invalid_argument("wsat: noise_p outside [0, 1]");
  if (params.max_tries < 1)
    throw std::invalid_argument("wsat: max_tries must be >= 1");

  RunRecord rec;
  if (params.record_uf)
    rec.clause_unsat_counts.assign(static_cast<size_t>(m_), 0);

  // Probes sorted descending: crossings occur in that order since f_b is
  // nonincreasing in b.
  std::vector<int> probes = params.probes;
  std::sort(probes.begin(), probes.end(), std::greater<int>());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  size_t next_probe = 0;

  uint64_t flips = 0;
  auto check_crossings = [&] {
    while (next_probe < probes.size() &&
           static_cast<int>(unsat_list_.size()) <= probes[next_probe]) {
      rec.f_values.emplace_back(probes[next_probe], flips);
      rec.snapshots.emplace_back(probes[next_probe], assignment());
      ++next_probe;
    }
  };

  for (int attempt = 0; attempt < params.max_tries; ++attempt) {
    reset_random(rng);
    check_crossings();
    uint64_t flips_this_try = 0;
    while (!unsat_list_.empty() && flips_this_try < params.max_flips) {
      int ci = pick_unsat_clause(rng);
      int var = select_variable_skc(ci, params.noise_p, rng);
      flip(var);
      ++flips;
      ++flips_this_try;
      if (params.record_uf)
        for (int c : unsat_list_)
          rec.clause_unsat_counts[static_cast<size_t>(c)]++;
      check_crossings();
    }
    if (unsat_list_.empty()) {
      rec.run_length = flips;
      rec.terminated = RunTermination::solved;
      return rec;
    }
  }
  rec.run_length = flips;
  rec.terminated = RunTermination::cap_exceeded;
  return rec;
}

RunRecord wsat_run(const CnfInstance &instance, const WsatParams &params) {
  WsatEngine engine(instance);
  Rng rng(params.rng_seed);
  return engine.run(params, rng);
}

InstanceCostStats measure_cost(const CnfInstance &instance,
                               const CostParams &params,
                               const SolutionSet *solutions) {
  if (params.runs < 1)
    throw std::invalid_argument("measure_cost: runs must be >= 1");
  int R = params.runs;
  bool want_f5 = std::find(params.wsat.probes.begin(),
                           params.wsat.probes.end(), 5) !=
                 params.wsat.probes.end();
  bool want_hdns = want_f5 && solutions && solutions->complete() &&
                   !solutions->empty();

  std::vector<double> lengths(static_cast<size_t>(R));
  std::vector<double> f5(static_cast<size_t>(R),
                         std::numeric_limits<double>::quiet_NaN());
  std::vector<double> hdns_f5(static_cast<size_t>(R),
                              std::numeric_limits<double>::quiet_NaN());
  std::vector<uint8_t> capped(static_cast<size_t>(R), 0);
  int workers = std::max(1, params.workers);
  workers = std::min(workers, R);
  std::vector<std::vector<uint64_t>> uf_partial(
      static_cast<size_t>(workers),
      std::vector<uint64_t>(
          params.wsat.record_uf ? static_cast<size_t>(instance.num_clauses())
                                : 0,
          0));

  auto worker_fn = [&](int w) {
    WsatEngine engine(instance);
    for (int i = w; i < R; i += workers) {
      Rng rng(derive_seed(params.wsat.rng_seed, static_cast<uint64_t>(i)));
      RunRecord rec = engine.run(params.wsat, rng);
      lengths[static_cast<size_t>(i)] = static_cast<double>(rec.run_length);
      capped[static_cast<size_t>(i)] =
          rec.terminated == RunTermination::cap_exceeded;
      if (want_f5)
        if (auto f = rec.f_value(5))
          f5[static_cast<size_t>(i)] = static_cast<double>(*f);
      if (want_hdns)
        if (const Assignment *snap = rec.snapshot(5))
          hdns_f5[static_cast<size_t>(i)] =
              static_cast<double>(hdns(*snap, *solutions));
      if (params.wsat.record_uf)
        for (int c = 0; c < instance.num_clauses(); ++c)
          uf_partial[static_cast<size_t>(w)][static_cast<size_t>(c)] +=
              rec.clause_unsat_counts[static_cast<size_t>(c)];
    }
  };
  if (workers == 1) {
    worker_fn(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(worker_fn, w);
    for (auto &t : pool)
      t.join();
  }

  InstanceCostStats out;
  out.runs = R;
  out.run_lengths = lengths;
  out.cost = median(lengths);
  out.q25 = percentile(lengths, 25.0);
  out.q75 = percentile(lengths, 75.0);
  for (uint8_t c : capped)
    out.cap_exceeded_runs += c;
  if (out.cap_exceeded_runs > 0 && params.fail_on_cap)
    throw BudgetExhausted("measure_cost: a run exceeded the flip cap");

  auto present = [](const std::vector<double> &v) {
    std::vector<double> out2;
    for (double x : v)
      if (!std::isnan(x))
        out2.push_back(x);
    return out2;
  };
  double nan = std::numeric_limits<double>::quiet_NaN();
  out.median_f5 = out.mean_f5 = out.mean_hdns_f5 = nan;
  if (want_f5) {
    std::vector<double> v = present(f5);
    if (!v.empty()) {
      out.median_f5 = median(v);
      double s = 0;
      for (double x : v)
        s += x;
      out.mean_f5 = s / static_cast<double>(v.size());
    }
  }
  if (want_hdns) {
    std::vector<double> v = present(hdns_f5);
    if (!v.empty()) {
      double s = 0;
      for (double x : v)
        s += x;
      out.mean_hdns_f5 = s / static_cast<double>(v.size());
    }
  }
  if (params.wsat.record_uf) {
    out.uf.assign(static_cast<size_t>(instance.num_clauses()), 0.0);
    for (int c = 0; c < instance.num_clauses(); ++c) {
      uint64_t total = 0;
      for (int w = 0; w < workers; ++w)
        total += uf_partial[static_cast<size_t>(w)][static_cast<size_t>(c)];
      out.uf[static_cast<size_t>(c)] =
          static_cast<double>(total) / static_cast<double>(R);
    }
  }
  return out;
}

} // namespace satkit
