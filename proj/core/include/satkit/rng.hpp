#pragma once

#include <cstdint>
#include <vector>

namespace satkit {

/// Deterministic 64-bit generator (splitmix64). Every stochastic routine in
/// the library takes one of these explicitly; nothing draws from hidden
/// global state, so a root seed plus the documented derivation below replays
/// any run bit-for-bit regardless of scheduling.
class Rng {
public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint32_t next_u32() { return static_cast<uint32_t>(next_u64() >> 32); }

  /// Uniform double in [0, 1).
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). bound must be positive.
  uint64_t below(uint64_t bound) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  bool chance(double p) { return next_unit() < p; }

  bool coin() { return (next_u64() & 1) != 0; }

  /// Standard normal via Box-Muller (used by statistics tests and nowhere in
  /// the solvers).
  double gaussian();

  /// Fisher-Yates shuffle.
  template <typename T> void shuffle(std::vector<T> &v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  uint64_t state_;
};

/// Derives an independent seed for stream `stream` of a root seed.
/// Composable: run i on instance j uses derive_seed(derive_seed(root, j), i).
uint64_t derive_seed(uint64_t root, uint64_t stream);
uint64_t derive_seed(uint64_t root, uint64_t a, uint64_t b);

} // namespace satkit
