#include "acceptance/criteria.hpp"

#include <atomic>
#include <cmath>

#include "satkit/backbone_lab.hpp"
#include "satkit/dpll.hpp"
#include "satkit/errors.hpp"
#include "satkit/generator.hpp"
#include "satkit/parallel.hpp"
#include "satkit/rng.hpp"
#include "support/brute_force.hpp"

namespace satkit::acceptance {

using test::BruteForce;

// Criterion 1: on 200 random instances with n <= 16 and m/n in [3.5, 5.0],
// solve status, solution count, backbone, per-clause bc and hdns for 10
// random assignments each all match exhaustive 2^n enumeration.
bool oracle_equivalence(int workers) {
  const int kInstances = 200;
  const uint64_t kSeed = 0x0acce551u;
  std::atomic<int> mismatches{0};
  parallel_for(workers, kInstances, [&](int i) {
    Rng rng(derive_seed(kSeed, static_cast<uint64_t>(i)));
    int n = 8 + static_cast<int>(rng.below(9)); // 8..16
    double ratio = 3.5 + rng.next_unit() * 1.5;
    GenSpec spec{n, static_cast<int>(std::llround(ratio * n)), 3, 0};
    CnfInstance inst = generate_random_ksat(spec, rng);
    BruteForce oracle(inst);

    SolveResult r = solve(inst);
    if (r.satisfiable != oracle.satisfiable()) {
      mismatches++;
      return;
    }
    if (count_solutions(inst) != oracle.count_solutions()) {
      mismatches++;
      return;
    }
    if (r.satisfiable) {
      if (compute_backbone(inst) != *oracle.backbone()) {
        mismatches++;
        return;
      }
      std::vector<int> bc = backbone_contribution(inst);
      int bb_size = oracle.backbone()->size();
      for (int c = 0; c < inst.num_clauses(); ++c) {
        auto child = oracle.backbone_without(c);
        int expected = child ? bb_size - child->size() : 0;
        if (bc[static_cast<size_t>(c)] != expected) {
          mismatches++;
          return;
        }
      }
      SolutionSet sols = enumerate_solutions(inst, uint64_t{1} << n);
      for (int q = 0; q < 10; ++q) {
        Assignment t(n);
        for (int v = 1; v <= n; ++v)
          t.set(v, rng.coin());
        if (hdns(t, sols) != oracle.min_hamming(t)) {
          mismatches++;
          return;
        }
      }
    }
  });
  std::printf("  oracle equivalence: %d/%d instances clean\n",
              kInstances - mismatches.load(), kInstances);
  return mismatches.load() == 0;
}

namespace {

// Definition check, both bullets, by brute force: same backbone as parent,
// and every single-clause deletion strictly shrinks the backbone.
bool check_bms_definition(const CnfInstance &parent, const CnfInstance &sub) {
  BruteForce parent_oracle(parent);
  BruteForce sub_oracle(sub);
  auto parent_bb = parent_oracle.backbone();
  auto sub_bb = sub_oracle.backbone();
  if (!parent_bb || !sub_bb || !(*parent_bb == *sub_bb))
    return false;
  for (int c = 0; c < sub.num_clauses(); ++c) {
    auto child = sub_oracle.backbone_without(c);
    if (!child || child->size() >= sub_bb->size())
      return false;
  }
  return true;
}

// MUS check of sub ∧ d by sub-bag satisfiability: unsatisfiable as a whole,
// satisfiable after any single clause deletion.
bool check_mus(const CnfInstance &with_d) {
  BruteForce oracle(with_d);
  if (oracle.satisfiable())
    return false;
  for (int c = 0; c < with_d.num_clauses(); ++c) {
    CnfInstance sub =
        remove_clauses(with_d, std::vector<int>{c}).instance;
    if (!BruteForce(sub).satisfiable())
      return false;
  }
  return true;
}

} // namespace

// Criterion 2: on 100 random satisfiable instances with n <= 10, find_bms
// output passes both the definition check and the MUS check of C' ∧ d.
bool bms_theorem_suite(int workers) {
  const int kInstances = 100;
  const uint64_t kSeed = 0x0acce552u;
  std::atomic<int> failures{0};
  parallel_for(workers, kInstances, [&](int i) {
    Rng rng(derive_seed(kSeed, static_cast<uint64_t>(i)));
    int n = 4 + static_cast<int>(rng.below(7)); // 4..10
    double ratio = 2.0 + rng.next_unit() * 2.5;
    GenSpec spec{n, std::max(1, static_cast<int>(std::llround(ratio * n))), 3,
                 0};
    CnfInstance inst = sample_satisfiable(spec, rng, 100000);
    BmsResult bms = find_bms(inst, rng);

    if (!check_bms_definition(inst, bms.sub_instance)) {
      // Empty-backbone parents must yield the empty sub-instance.
      if (!(bms.backbone.empty() && bms.sub_instance.num_clauses() == 0 &&
            compute_backbone(inst).empty())) {
        failures++;
        return;
      }
    }
    std::vector<Clause> ext = bms.sub_instance.clauses();
    ext.push_back(build_d_clause(bms.backbone));
    CnfInstance with_d(inst.num_vars(), std::move(ext));
    if (!check_mus(with_d))
      failures++;
  });
  std::printf("  theorem suite: %d/%d instances clean\n",
              kInstances - failures.load(), kInstances);
  return failures.load() == 0;
}

} // namespace satkit::acceptance
