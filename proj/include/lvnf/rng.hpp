#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "lvnf/types.hpp"

namespace lvnf {

// Seeded generator with explicit value mappings so that sequences are
// bit-stable across runs (std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : gen_(seed) {}

  uint64_t next() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), rejection sampled.
  uint64_t uniform_int(uint64_t n) {
    if (n == 0) return 0;
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller (cosine branch only, stateless).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * M_PI * u2);
  }

  Vec3 uniform_vec3(double lo, double hi) {
    double x = uniform(lo, hi);
    double y = uniform(lo, hi);
    double z = uniform(lo, hi);
    return Vec3(x, y, z);
  }

  Vec3 unit_vec3() {
    // Marsaglia rejection on the unit ball.
    for (;;) {
      Vec3 v = uniform_vec3(-1.0, 1.0);
      double n2 = v.squaredNorm();
      if (n2 > 1e-8 && n2 <= 1.0) return v / std::sqrt(n2);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace lvnf
