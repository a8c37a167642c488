#pragma once

#include <cstdint>
#include <random>

#include "panodet/geometry.hpp"

namespace panodet::testing {

class Gen {
 public:
  explicit Gen(std::uint32_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng_); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

  /// Uniform on the sphere.
  SphereCoord direction() {
    const double z = uniform(-1.0, 1.0);
    return canonical(std::asin(z), uniform(-kPi, kPi));
  }

  std::mt19937& engine() { return rng_; }

 private:
  std::mt19937 rng_;
};

}  // namespace panodet::testing
