#include "acceptance/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "satkit/experiment.hpp"
#include "satkit/parallel.hpp"
#include "satkit/rng.hpp"
#include "satkit/stats.hpp"

namespace fs = std::filesystem;

namespace satkit::acceptance {

namespace {

PairedSample bivariate_normal(int n, double rho, Rng &rng) {
  PairedSample s;
  for (int i = 0; i < n; ++i) {
    double z1 = rng.gaussian();
    double z2 = rng.gaussian();
    s.x.push_back(z1);
    s.y.push_back(rho * z1 + std::sqrt(1.0 - rho * rho) * z2);
  }
  return s;
}

// Kolmogorov-Smirnov distance of a sample against Uniform(0,1).
double ks_uniform(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double d = 0.0;
  size_t n = values.size();
  for (size_t i = 0; i < n; ++i) {
    double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    double lo = static_cast<double>(i) / static_cast<double>(n);
    d = std::max(d, std::max(std::fabs(values[i] - hi),
                             std::fabs(values[i] - lo)));
  }
  return d;
}

} // namespace

// Criterion 10: bootstrap CI coverage for known rho=0.7 in [90%, 99%] over
// 200 repetitions; randomization-test p approximately uniform on independent
// data (KS at alpha=0.01 over 500 repetitions).
bool statistics_calibration(int workers) {
  const double rho = 0.7;
  const int reps = 200;
  std::vector<uint8_t> covered(reps, 0);
  parallel_for(workers, reps, [&](int rep) {
    Rng rng(derive_seed(0xb007u, static_cast<uint64_t>(rep)));
    PairedSample s = bivariate_normal(200, rho, rng);
    BootstrapCi ci = bootstrap_ci_r(s, 1000, rng);
    covered[static_cast<size_t>(rep)] = ci.lo <= rho && rho <= ci.hi;
  });
  int cover_count = 0;
  for (uint8_t c : covered)
    cover_count += c;
  double coverage = 100.0 * cover_count / reps;
  std::printf("  bootstrap coverage: %.1f%% (target [90, 99])\n", coverage);
  bool coverage_ok = coverage >= 90.0 && coverage <= 99.0;

  const int ks_reps = 500;
  std::vector<double> pvals(ks_reps);
  parallel_for(workers, ks_reps, [&](int rep) {
    Rng rng(derive_seed(0xca11u, static_cast<uint64_t>(rep)));
    PairedSample s;
    for (int i = 0; i < 100; ++i) {
      s.x.push_back(rng.next_unit());
      s.y.push_back(rng.next_unit());
    }
    pvals[static_cast<size_t>(rep)] =
        randomization_test(s, 1000, rng).p_two_sided;
  });
  double d = ks_uniform(pvals);
  // KS critical value at alpha=0.01 for n=500: 1.628/sqrt(500).
  double crit = 1.628 / std::sqrt(static_cast<double>(ks_reps));
  std::printf("  randomization p KS distance: %.4f (crit %.4f)\n", d, crit);
  return coverage_ok && d < crit;
}

namespace {

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool csvs_identical(const ExperimentConfig &base, const fs::path &dir_a,
                    const fs::path &dir_b) {
  ExperimentConfig a = base;
  a.workers = 1;
  a.out_dir = dir_a.string();
  ExperimentConfig b = base;
  b.workers = 4;
  b.out_dir = dir_b.string();
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  ExperimentResult ra = run_experiment(a);
  ExperimentResult rb = run_experiment(b);
  if (ra.csv_paths.size() != rb.csv_paths.size())
    return false;
  for (size_t i = 0; i < ra.csv_paths.size(); ++i) {
    std::string ca = slurp(ra.csv_paths[i]);
    std::string cb = slurp(rb.csv_paths[i]);
    if (ca.empty() || ca != cb) {
      std::printf("  mismatch or empty: %s vs %s\n", ra.csv_paths[i].c_str(),
                  rb.csv_paths[i].c_str());
      return false;
    }
  }
  return true;
}

} // namespace

// Criterion 11: an experiment re-run with the same root seed and a different
// worker count produces byte-identical CSVs.
bool determinism_replay(int) {
  fs::path base = fs::temp_directory_path() / "satkit_determinism";
  fs::remove_all(base);

  ExperimentConfig peak = default_config(ExperimentKind::cost_peak);
  peak.n = 20;
  peak.ratios = {4.0, 4.4};
  peak.instances_per_cell = 6;
  peak.runs_per_instance = 40;
  peak.root_seed = 99;
  bool peak_ok = csvs_identical(peak, base / "peak_a", base / "peak_b");
  std::printf("  cost-peak determinism: %s\n", peak_ok ? "ok" : "FAILED");

  ExperimentConfig ufbc = default_config(ExperimentKind::uf_bc);
  ufbc.n = 20;
  ufbc.ratios = {4.2};
  ufbc.instances_per_cell = 10;
  ufbc.runs_per_instance = 30;
  ufbc.uf_runs = 30;
  ufbc.percentile_selection = {25, 50, 75};
  ufbc.root_seed = 7;
  bool ufbc_ok = csvs_identical(ufbc, base / "ufbc_a", base / "ufbc_b");
  std::printf("  uf-bc determinism: %s\n", ufbc_ok ? "ok" : "FAILED");

  return peak_ok && ufbc_ok;
}

} // namespace satkit::acceptance
