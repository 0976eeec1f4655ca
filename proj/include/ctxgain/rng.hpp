#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ctxgain {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded generator with hand-rolled draws. std::* distributions are
// implementation-defined, so every draw here is spelled out to keep
// outputs byte-identical for a given seed.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0)
      : engine_(splitmix64(seed)),
        fork_base_(splitmix64(seed ^ 0xa5a5a5a5a5a5a5a5ULL)) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t below(uint64_t n) {
    // Rejection sampling keeps the draw unbiased.
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // Independent child stream; deterministic in (seed, id).
  Rng fork(uint64_t id) const { return Rng(fork_base_ ^ splitmix64(id)); }

 private:
  std::mt19937_64 engine_;
  uint64_t fork_base_;
};

}  // namespace ctxgain
