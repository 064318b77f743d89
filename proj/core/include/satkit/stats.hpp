#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "satkit/rng.hpp"

namespace satkit {

/// Paired observations for correlation and regression.
struct PairedSample {
  std::vector<double> x;
  std::vector<double> y;

  size_t size() const { return x.size(); }
  static PairedSample from_pairs(std::span<const std::pair<double, double>> p);
};

/// Product-moment correlation coefficient. Throws std::invalid_argument on
/// fewer than two pairs or zero variance in either variable.
double pearson_r(const PairedSample &sample);

/// Pearson r of average-ranked data; ties receive the mean of the ranks they
/// occupy.
double spearman_rank(const PairedSample &sample);

struct LinearFit {
  double intercept = 0.0;
  double gradient = 0.0;
};

/// Least-squares fit minimizing squared residuals in y.
LinearFit ols_fit(const PairedSample &sample);

struct RandomizationResult {
  double r_observed = 0.0;
  std::vector<double> null_rs;
  /// Two-sided plus-one-corrected empirical p:
  /// (1 + #{|r_null| >= |r_obs|}) / (K + 1).
  double p_two_sided = 1.0;
  /// Observed r falls outside the range of the null sample entirely.
  bool reject_999 = false;
};

/// Correlation null test: K random permutations of y against fixed x.
/// Permutations whose correlation is undefined (degenerate) are impossible
/// here since permuting preserves variance.
RandomizationResult randomization_test(const PairedSample &sample, int K,
                                       Rng &rng);

struct BootstrapCi {
  double lo = 0.0; // 2.5th percentile of the bootstrap distribution of r
  double hi = 0.0; // 97.5th percentile
  int pseudo_samples = 0;
};

/// Pairs resampled with replacement, r per pseudo-sample, percentile bounds
/// on the 95% confidence interval. Degenerate pseudo-samples are redrawn, up
/// to a cap; persistent degeneracy throws.
BootstrapCi bootstrap_ci_r(const PairedSample &sample, int B, Rng &rng);

/// Percentile with linear interpolation between closest ranks: for sorted
/// values v[0..N-1] the q-th percentile sits at position (q/100)*(N-1).
/// Throws std::invalid_argument on empty input or q outside [0, 100].
double percentile(std::span<const double> values, double q);
std::vector<double> percentiles(std::span<const double> values,
                                std::span<const double> qs);
double median(std::span<const double> values);
/// 75th minus 25th percentile under the same interpolation rule.
double interquartile_range(std::span<const double> values);

} // namespace satkit
