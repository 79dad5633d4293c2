#ifndef SOVLAT_RANDOM_HPP
#define SOVLAT_RANDOM_HPP

#include <random>

#include "sovlat/types.hpp"

namespace sovlat {

// Deterministic random source; all stochastic choices in the library flow
// through one of these, seeded from the run configuration.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  // Uniform on the complex disk of the given radius.
  cplx disk(double radius = 1.0) {
    while (true) {
      const double x = uniform(-1.0, 1.0), y = uniform(-1.0, 1.0);
      if (x * x + y * y <= 1.0) return cplx(radius * x, radius * y);
    }
  }
  cplx box(double half_width = 1.0) {
    return cplx(uniform(-half_width, half_width), uniform(-half_width, half_width));
  }
  std::uint64_t integer() { return gen_(); }
  std::mt19937_64& raw() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace sovlat

#endif
