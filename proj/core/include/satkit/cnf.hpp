#pragma once

#include <cassert>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace satkit {

/// A literal in signed DIMACS form: +v is the positive literal of variable v,
/// -v the negative one. Variables are 1-based.
class Lit {
public:
  constexpr Lit() = default;
  constexpr explicit Lit(int dimacs) : code_(dimacs) { assert(dimacs != 0); }
  static constexpr Lit positive(int var) { return Lit(var); }
  static constexpr Lit negative(int var) { return Lit(-var); }

  constexpr int var() const { return code_ < 0 ? -code_ : code_; }
  constexpr bool is_positive() const { return code_ > 0; }
  constexpr Lit negated() const { return Lit(-code_); }
  constexpr int dimacs() const { return code_; }

  friend constexpr auto operator<=>(Lit a, Lit b) = default;

private:
  int code_ = 0;
};

/// A clause is an ordered disjunction of literals. The empty clause is legal
/// and unsatisfiable under every assignment.
using Clause = std::vector<Lit>;

/// Total truth-value map over variables 1..n.
class Assignment {
public:
  Assignment() = default;
  explicit Assignment(int num_vars, bool init = false)
      : values_(static_cast<size_t>(num_vars), init ? 1 : 0) {}
  static Assignment from_values(std::vector<uint8_t> values);

  int num_vars() const { return static_cast<int>(values_.size()); }
  bool value(int var) const { return values_[static_cast<size_t>(var - 1)] != 0; }
  void set(int var, bool v) { values_[static_cast<size_t>(var - 1)] = v ? 1 : 0; }
  void flip(int var) { values_[static_cast<size_t>(var - 1)] ^= 1; }
  bool satisfies(Lit l) const { return value(l.var()) == l.is_positive(); }

  friend bool operator==(const Assignment &, const Assignment &) = default;

private:
  std::vector<uint8_t> values_;
};

/// Number of variables two equally-sized assignments map differently.
/// Throws std::invalid_argument on a variable-count mismatch.
int hamming_distance(const Assignment &a, const Assignment &b);

/// Consistent set of literals (never both polarities of one variable),
/// ordered by variable index.
class Backbone {
public:
  Backbone() = default;
  /// Sorts by variable and validates consistency (throws
  /// std::invalid_argument on a duplicated variable).
  static Backbone from_literals(std::vector<Lit> literals);

  int size() const { return static_cast<int>(lits_.size()); }
  bool empty() const { return lits_.empty(); }
  bool contains(Lit l) const;
  std::span<const Lit> literals() const { return lits_; }

  friend bool operator==(const Backbone &, const Backbone &) = default;

private:
  std::vector<Lit> lits_;
};

/// A CNF instance: a bag (multiset) of clauses over variables 1..n. Clause
/// indices [0, m) are stable handles for the lifetime of the instance; all
/// per-clause statistics key on them. Instances are immutable values after
/// construction and safe to share across threads.
class CnfInstance {
public:
  CnfInstance() = default;
  /// Validates every literal's variable against num_vars (throws
  /// std::invalid_argument otherwise). Clauses are stored verbatim: duplicate
  /// clauses, repeated variables and complementary pairs inside a clause are
  /// all representable; the latter two are counted as "irregular" metadata.
  CnfInstance(int num_vars, std::vector<Clause> clauses);

  int num_vars() const { return num_vars_; }
  int num_clauses() const { return static_cast<int>(clauses_.size()); }
  const Clause &clause(int idx) const { return clauses_[static_cast<size_t>(idx)]; }
  const std::vector<Clause> &clauses() const { return clauses_; }

  /// Clauses containing a repeated variable or a complementary pair. The
  /// generator never produces these but parsed files may contain them.
  int irregular_clause_count() const { return irregular_; }

  /// FNV-1a over the canonical DIMACS text; used for provenance sidecars.
  uint64_t content_hash() const;

  friend bool operator==(const CnfInstance &, const CnfInstance &) = default;

private:
  int num_vars_ = 0;
  std::vector<Clause> clauses_;
  int irregular_ = 0;
};

/// Result of evaluating an instance under an assignment.
struct EvaluationResult {
  std::vector<int> unsat_indices; // sorted clause indices with no true literal

  int unsat_count() const { return static_cast<int>(unsat_indices.size()); }
  bool satisfied() const { return unsat_indices.empty(); }
  /// Quasi-solution test: true iff every unsatisfied clause lies in `bag`
  /// (sorted indices), i.e. the assignment is a member of Q_bag.
  bool within(std::span<const int> bag) const;
};

EvaluationResult evaluate(const CnfInstance &instance, const Assignment &t);

/// remove_clauses result: the reduced instance plus, for each surviving
/// clause, its index in the parent.
struct RemovedInstance {
  CnfInstance instance;
  std::vector<int> parent_index;
};

/// Removes exactly the addressed clause copies (multiset semantics: other
/// duplicates survive). Indices may be given in any order; duplicates within
/// `indices` are ignored. Throws std::out_of_range on a bad index.
RemovedInstance remove_clauses(const CnfInstance &instance,
                               std::span<const int> indices);

struct DimacsOptions {
  /// Accept a header clause count that disagrees with the clauses present
  /// (still an error by default).
  bool allow_count_mismatch = false;
};

/// Parses DIMACS CNF text: "p cnf n m" header, zero-terminated clauses,
/// comment lines starting with 'c' ignored. Clause order is preserved
/// (indices are semantic). Throws ParseError on malformed input.
CnfInstance parse_dimacs(std::string_view text, const DimacsOptions &opts = {});
CnfInstance parse_dimacs_file(const std::string &path,
                              const DimacsOptions &opts = {});

/// Writes DIMACS text; parse(write(c)) == c including clause order and
/// literal multiplicity.
std::string write_dimacs(const CnfInstance &instance);
void write_dimacs_file(const CnfInstance &instance, const std::string &path);

} // namespace satkit
