#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ctnet {

// SplitMix64: used to expand one master seed into independent substream seeds.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d9b133111eb2ebULL;
    return z ^ (z >> 31);
  }
};

// Deterministic RNG.  All distributions are generated from raw 64-bit draws
// with fixed arithmetic (no std::*_distribution), so a given seed yields
// bit-identical streams on every platform / standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(SplitMix64(seed).next()) {}

  std::uint64_t seed() const { return seed_; }

  // Independent substream; mixing the index through SplitMix64 decorrelates
  // streams even for consecutive indices.
  Rng substream(std::uint64_t index) const {
    SplitMix64 sm(seed_ ^ (0x5851f42d4c957f2dULL * (index + 1)));
    return Rng(sm.next());
  }

  std::uint64_t bits() { return eng_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [lo, hi] inclusive (rejection-free modulo is fine for
  // the small ranges used here).
  long uniform_int(long lo, long hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(bits() % span);
  }

  double sign() { return (bits() & 1) ? 1.0 : -1.0; }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; one spare kept between calls.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ctnet
