#include "satkit/rng.hpp"

#include <cmath>

namespace satkit {

double Rng::gaussian() {
  // Box-Muller, no spare caching: two draws per value keeps replay trivial.
  double u1 = 0.0;
  while (u1 <= 0.0)
    u1 = next_unit();
  double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

uint64_t derive_seed(uint64_t root, uint64_t stream) {
  Rng r(root ^ (0x9e3779b97f4a7c15ULL * (stream + 0x517cc1b727220a95ULL)));
  r.next_u64();
  return r.next_u64();
}

uint64_t derive_seed(uint64_t root, uint64_t a, uint64_t b) {
  return derive_seed(derive_seed(root, a), b);
}

} // namespace satkit
