#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "journey/tensor.hpp"

namespace journey {

// Seeded source of uniforms and unit Gaussians. Gaussians use the polar
// (Marsaglia) method on top of mt19937_64, so the stream is fully defined by
// this code and the seed, independent of libstdc++'s std::normal_distribution.
class RandomSource {
 public:
  explicit RandomSource(uint64_t seed) : engine_(seed) {}

  double uniform() {
    // [0,1) with 53 random bits.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  void fill_normal(std::vector<double>& out) {
    for (double& x : out) x = normal();
  }
  void fill_normal(Video& v) { fill_normal(v.data); }

  uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64 finalizer; used to derive independent per-segment / per-chain
// seeds from one journey seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace journey
