#pragma once

#include <cstdint>
#include <random>

#include "kbal/normal.hpp"

namespace kbal {

// splitmix64 finalizer; used to decorrelate per-replication seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic random stream. The base generator is std::mt19937_64 (fully
// specified by the standard, so output is identical across platforms).
// Uniforms take the top 53 bits; normals are generated by quantile inversion
// of (k + 1/2) / 2^53, never by std::normal_distribution, whose output is
// implementation defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
  }
  double uniform_open() {  // (0, 1)
    return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }
  double normal() { return normal_quantile(uniform_open()); }
  double uniform_range(double a, double b) { return a + (b - a) * uniform(); }
  double chisq1() {
    const double z = normal();
    return z * z;
  }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

// Stream for replication r of a run with the given base seed. The mixing is
// splitmix64(base_seed XOR golden_gamma*(r+1)); adjacent r values would
// otherwise hand near-identical states to the generator.
inline RngStream replication_stream(std::uint64_t base_seed, std::uint64_t r) {
  return RngStream(splitmix64(base_seed ^ (0x9e3779b97f4a7c15ull * (r + 1))));
}

}  // namespace kbal
