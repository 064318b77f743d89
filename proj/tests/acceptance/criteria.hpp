#pragma once

// Acceptance suite: each criterion returns true/false and prints diagnostic
// lines; the driver prints one PASS/FAIL line per criterion.

#include <cstdio>
#include <string>
#include <vector>

namespace satkit::acceptance {

struct Criterion {
  int number;
  const char *name;
  bool (*fn)(int workers);
};

// criteria_oracle.cpp
bool oracle_equivalence(int workers);          // 1
bool bms_theorem_suite(int workers);           // 2
// criteria_wsat.cpp
bool wsat_empirical_completeness(int workers); // 3
bool markov_chain_oracle(int workers);         // 4
// criteria_experiments.cpp
bool cost_peak_shape(int workers);             // 5
bool bms_hardening(int workers);               // 6
bool robustness_trends(int workers);           // 7
bool correlation_signs(int workers);           // 8
bool uf_bc_coupling(int workers);              // 9
// criteria_stats.cpp
bool statistics_calibration(int workers);      // 10
bool determinism_replay(int workers);          // 11

const std::vector<Criterion> &all_criteria();

} // namespace satkit::acceptance
