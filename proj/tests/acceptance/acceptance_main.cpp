#include "acceptance/criteria.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <thread>

namespace satkit::acceptance {

const std::vector<Criterion> &all_criteria() {
  static const std::vector<Criterion> criteria = {
      {1, "oracle equivalence (n<=16 exhaustive)", oracle_equivalence},
      {2, "BMS/MUS theorem property suite (n<=10)", bms_theorem_suite},
      {3, "WSAT empirical completeness (n=50 near threshold)",
       wsat_empirical_completeness},
      {4, "Markov-chain run-length oracle (n=8)", markov_chain_oracle},
      {5, "cost-peak shape (n=50 ratio sweep)", cost_peak_shape},
      {6, "BMS hardening (interpolation cost trend)", bms_hardening},
      {7, "robustness trends along the interpolation", robustness_trends},
      {8, "correlation signs at fixed ratio", correlation_signs},
      {9, "uf-bc coupling on percentile instances", uf_bc_coupling},
      {10, "statistics calibration (bootstrap, randomization)",
       statistics_calibration},
      {11, "determinism across worker counts", determinism_replay},
  };
  return criteria;
}

} // namespace satkit::acceptance

int main(int argc, char **argv) {
  using namespace satkit::acceptance;
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (const char *env = std::getenv("SATKIT_WORKERS"))
    workers = std::max(1, std::atoi(env));
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--workers") && i + 1 < argc)
      workers = std::max(1, std::atoi(argv[++i]));
    else
      only.push_back(std::atoi(argv[i]));
  }

  int failures = 0;
  for (const Criterion &c : all_criteria()) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), c.number) == only.end())
      continue;
    auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
      ok = c.fn(workers);
    } catch (const std::exception &e) {
      detail = std::string(" (exception: ") + e.what() + ")";
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    std::printf("[%s] criterion %2d: %s [%.1fs]%s\n", ok ? "PASS" : "FAIL",
                c.number, c.name, secs, detail.c_str());
    std::fflush(stdout);
    failures += !ok;
  }
  if (failures)
    std::printf("%d criterion(s) failed\n", failures);
  else
    std::printf("all criteria passed\n");
  return failures == 0 ? 0 : 1;
}
