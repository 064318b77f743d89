#include "satkit/cnf.hpp"

#include <algorithm>
#include <stdexcept>

namespace satkit {

Assignment Assignment::from_values(std::vector<uint8_t> values) {
  Assignment a;
  a.values_ = std::move(values);
  for (auto &v : a.values_)
    v = v ? 1 : 0;
  return a;
}

int hamming_distance(const Assignment &a, const Assignment &b) {
  if (a.num_vars() != b.num_vars())
    throw std::invalid_argument("hamming_distance: variable-count mismatch");
  int d = 0;
  for (int v = 1; v <= a.num_vars(); ++v)
    d += a.value(v) != b.value(v);
  return d;
}

Backbone Backbone::from_literals(std::vector<Lit> literals) {
  std::sort(literals.begin(), literals.end(),
            [](Lit a, Lit b) { return a.var() < b.var(); });
  for (size_t i = 1; i < literals.size(); ++i)
    if (literals[i].var() == literals[i - 1].var())
      throw std::invalid_argument("backbone: variable appears twice");
  Backbone b;
  b.lits_ = std::move(literals);
  return b;
}

bool Backbone::contains(Lit l) const {
  auto it = std::lower_bound(
      lits_.begin(), lits_.end(), l,
      [](Lit a, Lit b) { return a.var() < b.var(); });
  return it != lits_.end() && *it == l;
}

namespace {

bool clause_irregular(const Clause &c) {
  for (size_t i = 0; i < c.size(); ++i)
    for (size_t j = i + 1; j < c.size(); ++j)
      if (c[i].var() == c[j].var())
        return true;
  return false;
}

} // namespace

CnfInstance::CnfInstance(int num_vars, std::vector<Clause> clauses)
    : num_vars_(num_vars), clauses_(std::move(clauses)) {
  if (num_vars < 0)
    throw std::invalid_argument("instance: negative variable count");
  for (const Clause &c : clauses_) {
    for (Lit l : c)
      if (l.var() < 1 || l.var() > num_vars_)
        throw std::invalid_argument("instance: literal out of range");
    irregular_ += clause_irregular(c);
  }
}

uint64_t CnfInstance::content_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<uint64_t>(num_vars_));
  mix(clauses_.size());
  for (const Clause &c : clauses_) {
    mix(c.size());
    for (Lit l : c)
      mix(static_cast<uint64_t>(static_cast<int64_t>(l.dimacs())));
  }
  return h;
}

EvaluationResult evaluate(const CnfInstance &instance, const Assignment &t) {
  if (t.num_vars() != instance.num_vars())
    throw std::invalid_argument("evaluate: assignment size mismatch");
  EvaluationResult r;
  for (int i = 0; i < instance.num_clauses(); ++i) {
    const Clause &c = instance.clause(i);
    bool sat = false;
    for (Lit l : c)
      if (t.satisfies(l)) {
        sat = true;
        break;
      }
    if (!sat)
      r.unsat_indices.push_back(i);
  }
  return r;
}

bool EvaluationResult::within(std::span<const int> bag) const {
  return std::includes(bag.begin(), bag.end(), unsat_indices.begin(),
                       unsat_indices.end());
}

RemovedInstance remove_clauses(const CnfInstance &instance,
                               std::span<const int> indices) {
  std::vector<uint8_t> drop(static_cast<size_t>(instance.num_clauses()), 0);
  for (int idx : indices) {
    if (idx < 0 || idx >= instance.num_clauses())
      throw std::out_of_range("remove_clauses: index out of range");
    drop[static_cast<size_t>(idx)] = 1;
  }
  std::vector<Clause> kept;
  std::vector<int> parent;
  kept.reserve(drop.size());
  for (int i = 0; i < instance.num_clauses(); ++i)
    if (!drop[static_cast<size_t>(i)]) {
      kept.push_back(instance.clause(i));
      parent.push_back(i);
    }
  return {CnfInstance(instance.num_vars(), std::move(kept)), std::move(parent)};
}

} // namespace satkit
