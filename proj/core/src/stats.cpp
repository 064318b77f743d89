#include "satkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "satkit/errors.hpp"

namespace satkit {

PairedSample
PairedSample::from_pairs(std::span<const std::pair<double, double>> p) {
  PairedSample s;
  s.x.reserve(p.size());
  s.y.reserve(p.size());
  for (auto &[a, b] : p) {
    s.x.push_back(a);
    s.y.push_back(b);
  }
  return s;
}

namespace {

struct Moments {
  double mean_x, mean_y, var_x, var_y, cov;
};

Moments moments(std::span<const double> x, std::span<const double> y) {
  size_t n = x.size();
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double vx = 0, vy = 0, cov = 0;
  for (size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    vx += dx * dx;
    vy += dy * dy;
    cov += dx * dy;
  }
  return {mx, my, vx, vy, cov};
}

void require_pairs(const PairedSample &s) {
  if (s.x.size() != s.y.size())
    throw std::invalid_argument("paired sample: length mismatch");
  if (s.size() < 2)
    throw std::invalid_argument("paired sample: need at least two pairs");
}

double pearson_from(std::span<const double> x, std::span<const double> y) {
  Moments m = moments(x, y);
  if (m.var_x == 0.0 || m.var_y == 0.0)
    throw std::invalid_argument("correlation undefined: zero variance");
  double r = m.cov / std::sqrt(m.var_x * m.var_y);
  return std::clamp(r, -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> v) {
  size_t n = v.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]])
      ++j;
    double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k)
      ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

} // namespace

double pearson_r(const PairedSample &sample) {
  require_pairs(sample);
  return pearson_from(sample.x, sample.y);
}

double spearman_rank(const PairedSample &sample) {
  require_pairs(sample);
  std::vector<double> rx = average_ranks(sample.x);
  std::vector<double> ry = average_ranks(sample.y);
  return pearson_from(rx, ry);
}

LinearFit ols_fit(const PairedSample &sample) {
  require_pairs(sample);
  Moments m = moments(sample.x, sample.y);
  if (m.var_x == 0.0)
    throw std::invalid_argument("ols_fit: zero variance in x");
  double gradient = m.cov / m.var_x;
  return {m.mean_y - gradient * m.mean_x, gradient};
}

RandomizationResult randomization_test(const PairedSample &sample, int K,
                                       Rng &rng) {
  require_pairs(sample);
  if (K < 1)
    throw std::invalid_argument("randomization_test: K must be >= 1");
  RandomizationResult res;
  res.r_observed = pearson_from(sample.x, sample.y);
  std::vector<double> y = sample.y;
  res.null_rs.reserve(static_cast<size_t>(K));
  int at_least = 0;
  double null_lo = 2.0, null_hi = -2.0;
  for (int k = 0; k < K; ++k) {
    rng.shuffle(y);
    double r = pearson_from(sample.x, y);
    res.null_rs.push_back(r);
    if (std::fabs(r) >= std::fabs(res.r_observed))
      ++at_least;
    null_lo = std::min(null_lo, r);
    null_hi = std::max(null_hi, r);
  }
  res.p_two_sided = (1.0 + at_least) / (static_cast<double>(K) + 1.0);
  res.reject_999 = res.r_observed < null_lo || res.r_observed > null_hi;
  return res;
}

BootstrapCi bootstrap_ci_r(const PairedSample &sample, int B, Rng &rng) {
  require_pairs(sample);
  if (B < 1)
    throw std::invalid_argument("bootstrap_ci_r: B must be >= 1");
  size_t n = sample.size();
  std::vector<double> rx(n), ry(n), rs;
  rs.reserve(static_cast<size_t>(B));
  const int max_redraws = 1000;
  int redraws = 0;
  for (int b = 0; b < B; ++b) {
    for (;;) {
      for (size_t i = 0; i < n; ++i) {
        size_t q = static_cast<size_t>(rng.below(n));
        rx[i] = sample.x[q];
        ry[i] = sample.y[q];
      }
      try {
        rs.push_back(pearson_from(rx, ry));
        break;
      } catch (const std::invalid_argument &) {
        if (++redraws > max_redraws)
          throw Error("bootstrap_ci_r: persistently degenerate pseudo-samples");
      }
    }
  }
  BootstrapCi ci;
  ci.lo = percentile(rs, 2.5);
  ci.hi = percentile(rs, 97.5);
  ci.pseudo_samples = B;
  return ci;
}

double percentile(std::span<const double> values, double q) {
  if (values.empty())
    throw std::invalid_argument("percentile: empty input");
  if (q < 0.0 || q > 100.0)
    throw std::invalid_argument("percentile: q outside [0, 100]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

std::vector<double> percentiles(std::span<const double> values,
                                std::span<const double> qs) {
  std::vector<double> out;
  out.reserve(qs.size());
  for (double q : qs)
    out.push_back(percentile(values, q));
  return out;
}

double median(std::span<const double> values) {
  return percentile(values, 50.0);
}

double interquartile_range(std::span<const double> values) {
  return percentile(values, 75.0) - percentile(values, 25.0);
}

} // namespace satkit
