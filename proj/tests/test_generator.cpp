#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "satkit/dpll.hpp"
#include "satkit/errors.hpp"
#include "satkit/generator.hpp"
#include "satkit/rng.hpp"

using namespace satkit;

TEST_CASE("generated clauses have k distinct variables") {
  Rng rng(1);
  GenSpec spec{100, 429, 3, 0};
  CnfInstance inst = generate_random_ksat(spec, rng);
  CHECK(inst.num_clauses() == 429);
  CHECK(inst.irregular_clause_count() == 0);
  for (const Clause &c : inst.clauses()) {
    REQUIRE(c.size() == 3);
    std::set<int> vars;
    for (Lit l : c)
      vars.insert(l.var());
    CHECK(vars.size() == 3);
  }
}

TEST_CASE("k == n forces every variable to be mentioned") {
  Rng rng(2);
  GenSpec spec{3, 1, 3, 0};
  CnfInstance inst = generate_random_ksat(spec, rng);
  std::set<int> vars;
  for (Lit l : inst.clause(0))
    vars.insert(l.var());
  CHECK(vars == std::set<int>{1, 2, 3});
}

TEST_CASE("k > n rejected") {
  Rng rng(3);
  GenSpec spec{2, 1, 3, 0};
  CHECK_THROWS_AS((void)generate_random_ksat(spec, rng), std::invalid_argument);
}

TEST_CASE("polarity balance and variable marginals") {
  Rng rng(4);
  GenSpec spec{10, 1000, 3, 0};
  int positives = 0, literals = 0;
  std::vector<int> var_counts(11, 0);
  for (int rep = 0; rep < 34; ++rep) {
    CnfInstance inst = generate_random_ksat(spec, rng);
    for (const Clause &c : inst.clauses())
      for (Lit l : c) {
        ++literals;
        positives += l.is_positive();
        var_counts[static_cast<size_t>(l.var())]++;
      }
  }
  REQUIRE(literals >= 100000);
  double frac = static_cast<double>(positives) / literals;
  double sigma = std::sqrt(0.25 / literals);
  CHECK(std::fabs(frac - 0.5) < 3 * sigma);

  // chi-square for uniform variable marginals, 9 dof, alpha=0.01 -> 21.67
  double expected = static_cast<double>(literals) / 10.0;
  double chi2 = 0;
  for (int v = 1; v <= 10; ++v)
    chi2 += (var_counts[static_cast<size_t>(v)] - expected) *
            (var_counts[static_cast<size_t>(v)] - expected) / expected;
  CHECK(chi2 < 21.67);
}

TEST_CASE("same seed gives byte-identical instances") {
  GenSpec spec{20, 86, 3, 0};
  Rng a(77), b(77);
  CnfInstance ia = generate_random_ksat(spec, a);
  CnfInstance ib = generate_random_ksat(spec, b);
  CHECK(write_dimacs(ia) == write_dimacs(ib));
}

TEST_CASE("sample_satisfiable: empty instance accepted immediately") {
  Rng rng(5);
  GenSpec spec{5, 0, 3, 0};
  SampleReport rep;
  CnfInstance inst = sample_satisfiable(spec, rng, 10, &rep);
  CHECK(rep.attempts == 1);
  CHECK(inst.num_clauses() == 0);
}

TEST_CASE("sample_satisfiable: deep overconstrained region exhausts budget") {
  Rng rng(6);
  GenSpec spec{20, 200, 3, 0};
  CHECK_THROWS_AS((void)sample_satisfiable(spec, rng, 5), BudgetExhausted);
}

TEST_CASE("satisfiable fraction declines through the transition band") {
  // Threshold location drifts at small n, so the check is the shape of the
  // decline rather than a pinned 50% point.
  Rng rng(7);
  auto sat_fraction = [&](double ratio, int samples) {
    GenSpec spec{50, static_cast<int>(std::llround(ratio * 50)), 3, 0};
    int sat = 0;
    for (int i = 0; i < samples; ++i)
      sat += solve(generate_random_ksat(spec, rng)).satisfiable;
    return static_cast<double>(sat) / samples;
  };
  double at_43 = sat_fraction(4.3, 250);
  double at_49 = sat_fraction(4.9, 250);
  CHECK(at_43 > 0.4);
  CHECK(at_49 < at_43);
  CHECK(at_49 < 0.35);
}

TEST_CASE("sample_with_backbone_size: postcondition re-verified") {
  Rng rng(8);
  GenSpec spec{10, 43, 3, 0};
  SampleReport rep;
  Backbone backbone;
  CnfInstance inst =
      sample_with_backbone_size(spec, 5, rng, 100000, &rep, 0, &backbone);
  CHECK(backbone.size() == 5);
  CHECK(compute_backbone(inst).size() == 5);
  CHECK(rep.attempts >= 1);
}

TEST_CASE("sample_with_backbone_size: target 0 with no clauses") {
  Rng rng(9);
  GenSpec spec{4, 0, 3, 0};
  SampleReport rep;
  CnfInstance inst = sample_with_backbone_size(spec, 0, rng, 10, &rep);
  CHECK(rep.attempts == 1);
  CHECK(inst.num_clauses() == 0);
}

TEST_CASE("backbone-size histogram: requested sizes come back exact") {
  Rng rng(10);
  GenSpec spec{12, 52, 3, 0};
  std::map<int, int> histogram;
  for (int i = 0; i < 300; ++i) {
    CnfInstance inst = generate_random_ksat(spec, rng);
    SolveResult r = solve(inst);
    if (r.satisfiable)
      histogram[compute_backbone(inst).size()]++;
  }
  REQUIRE(!histogram.empty());
  // Pick an observed size and demand the rejection sampler reproduces it.
  int target = histogram.rbegin()->first;
  Backbone backbone;
  CnfInstance inst =
      sample_with_backbone_size(spec, target, rng, 100000, nullptr, 0, &backbone);
  CHECK(backbone.size() == target);
  CHECK(compute_backbone(inst) == backbone);
}

TEST_CASE("tolerance band accepts nearby sizes") {
  Rng rng(11);
  GenSpec spec{12, 52, 3, 0};
  Backbone backbone;
  (void)sample_with_backbone_size(spec, 6, rng, 100000, nullptr, 2, &backbone);
  CHECK(std::abs(backbone.size() - 6) <= 2);
}
