#include <doctest.h>

#include <cmath>

#include "satkit/rng.hpp"

using namespace satkit;

TEST_CASE("same seed replays the identical stream") {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i)
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derived seeds differ across streams and compose") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(1, 2, 3) == derive_seed(derive_seed(1, 2), 3));
}

TEST_CASE("below() is in range and roughly uniform") {
  Rng rng(77);
  const uint64_t bound = 7;
  std::vector<int> counts(bound, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    uint64_t v = rng.below(bound);
    REQUIRE(v < bound);
    counts[v]++;
  }
  // chi-square, 6 dof, alpha=0.01 critical value 16.81
  double expected = static_cast<double>(draws) / bound;
  double chi2 = 0;
  for (int c : counts)
    chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 16.81);
}

TEST_CASE("next_unit stays in [0,1) and chance() tracks p") {
  Rng rng(9);
  int hits = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    double u = rng.next_unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    hits += rng.chance(0.55);
  }
  double frac = static_cast<double>(hits) / draws;
  double sigma = std::sqrt(0.55 * 0.45 / draws);
  CHECK(std::fabs(frac - 0.55) < 4 * sigma);
}

TEST_CASE("shuffle produces a permutation") {
  Rng rng(31);
  std::vector<int> v{1, 2, 3, 4, 5, 6};
  std::vector<int> orig = v;
  rng.shuffle(v);
  std::sort(v.begin(), v.end());
  CHECK(v == orig);
}
