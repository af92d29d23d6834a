#pragma once

#include <cmath>
#include <cstdint>

#include "remsim/units.hpp"

// Counter-seeded xoshiro256++ with SplitMix64 stream derivation.
// Substreams are keyed by (seed, stream ids), so any worker can regenerate
// the stream for a given chunk without coordination. All samplers draw a
// fixed, data-independent number of engine outputs per call where possible
// (normal uses no cached spare) to keep replay reasoning simple.

namespace remsim {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// derived seed for an indexed sub-run (per scan point, per frame, ...)
inline uint64_t mix_seed(uint64_t seed, uint64_t id) {
  uint64_t sm = seed ^ (id * 0x9e3779b97f4a7c15ULL);
  return splitmix64(sm);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  // Independent stream for (seed, a, b, c): ids are folded through SplitMix64
  // so sequential chunk indices land on well-separated states.
  static Rng substream(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t sm = seed;
    uint64_t h = splitmix64(sm);
    sm = h ^ (a * 0x9e3779b97f4a7c15ULL);
    h = splitmix64(sm);
    sm = h ^ (b * 0xc2b2ae3d27d4eb4fULL);
    h = splitmix64(sm);
    sm = h ^ (c * 0x165667b19e3779f9ULL);
    return Rng(splitmix64(sm));
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal, Box-Muller without caching the second deviate
  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  // standard Cauchy (Lorentzian of unit HWHM)
  double cauchy() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0 || u >= 1.0);
    return std::tan(kPi * (u - 0.5));
  }

  // Exp(1)/rate
  double exponential(double rate) {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return -std::log(u) / rate;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Knuth product method below lambda=30, rounded normal above. The normal
  // branch is fine here: every use has either lambda<1 (shell occupancy
  // never reaches it) or only needs mean/variance to O(1/sqrt(lambda)).
  long poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 30.0) {
      const double limit = std::exp(-lambda);
      double prod = uniform();
      long n = 0;
      while (prod > limit) {
        prod *= uniform();
        ++n;
      }
      return n;
    }
    const double x = lambda + std::sqrt(lambda) * normal();
    return x < 0.0 ? 0 : static_cast<long>(std::lround(x));
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4]{};
};

}  // namespace remsim
