#pragma once

#include <cmath>
#include <cstdint>

namespace wncs {

// splitmix64. Tiny, fast, and counter-like: good enough statistics for the
// Monte-Carlo duty here, and trivially reproducible across platforms.
struct Rng {
  uint64_t s = 0;

  Rng() = default;
  explicit Rng(uint64_t seed) : s(seed) {}

  uint64_t next_u64() {
    uint64_t z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (0,1]; safe as a log() argument
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // index in [0, n)
  int uniform_index(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }
};

inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Independent stream for replication r of an experiment seeded with `seed`.
// Streams are decorrelated by running the seed through the finalizer twice.
inline Rng replication_stream(uint64_t seed, uint64_t r) {
  return Rng(mix64(seed ^ mix64((r + 1) * 0x9e3779b97f4a7c15ull)));
}

// Explicit Box-Muller so that draws are identical wherever the artifact runs;
// std::normal_distribution is not pinned down by the standard.
inline void normal_pair(Rng& g, double& z0, double& z1) {
  double u1 = g.uniform_pos();
  double u2 = g.uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double t = 6.283185307179586 * u2;
  z0 = r * std::cos(t);
  z1 = r * std::sin(t);
}

}  // namespace wncs
