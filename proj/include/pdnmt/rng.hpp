// Counter-based random streams. A stream is keyed by (seed, stream id), so
// independent consumers (one per corpus example, one per parameter tensor)
// draw identical values no matter in which order, or on which worker, they
// run. The generator is splitmix64.
#pragma once

#include <cstdint>
#include <string>

namespace pdnmt {

class Rng {
 public:
  Rng(uint64_t seed, uint64_t stream) : state_(mix(mix(seed) ^ mix(stream ^ 0x9e3779b97f4a7c15ull))) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix_out(state_);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  uint32_t below(uint32_t n) { return static_cast<uint32_t>(next_u64() % n); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    return mix_out(z);
  }
  static uint64_t mix_out(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t state_;
};

// FNV-1a, used to derive per-name parameter streams and config digests.
inline uint64_t fnv1a(const char* data, size_t len) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

}  // namespace pdnmt
