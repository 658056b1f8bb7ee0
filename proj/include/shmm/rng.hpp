#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "shmm/types.hpp"

namespace shmm {

// splitmix64 finalizer. Used to spread seed material.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent child seed from a master seed and up to three
// stream coordinates (e.g. model index, sample size, realization).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ mix64(a + 0x1ULL));
  s = mix64(s ^ mix64(b + 0x9e3779b97f4a7c15ULL));
  s = mix64(s ^ mix64(c + 0x2545f4914f6cdd1dULL));
  return s;
}

// Seeded random stream. The distributions are built on the raw mt19937_64
// output rather than the std:: distribution adaptors, whose sequences are
// not pinned by the standard; this keeps sampled data identical across
// standard library implementations for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the spare draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));  // log(1-u1), u1 < 1
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  // Draws an index from a probability vector by inverse CDF. The vector is
  // assumed to sum to ~1; accumulated rounding is absorbed by the last index.
  int categorical(const Vector& p) {
    const double u = uniform01();
    double acc = 0.0;
    const int n = static_cast<int>(p.size());
    for (int i = 0; i < n; ++i) {
      acc += p[i];
      if (u < acc) return i;
    }
    return n - 1;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shmm
