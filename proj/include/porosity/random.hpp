#pragma once

#include "porosity/core.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace porosity {

/// Thin wrapper over std::mt19937_64 with platform-independent conversions
/// (the std distributions are implementation-defined, these are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng for_index(std::uint64_t seed, std::uint64_t index) {
    return Rng(rng::stream_seed(seed, index));
  }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Exp(1), strictly positive
  double exponential() { return -std::log1p(-uniform()) + 0x1.0p-60; }

  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  // standard normal (Box-Muller)
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace porosity
