#pragma once

#include <cstdint>
#include <random>

#include "sprayconn/core_space.hpp"

namespace sprayconn {

/// Axis-aligned sampling box, the same interval on every coordinate.
struct Box {
  double lo = -1.0;
  double hi = 1.0;
};

/// Where and how to draw samples for a check.
struct SampleContext {
  Box box;
  std::uint64_t seed = 42;
};

/// Seeded uniform sampler; the sequence is fully determined by the seed.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  Vector uniform(std::size_t n, double lo, double hi) {
    Vector v(n);
    for (auto& c : v) c = uniform(lo, hi);
    return v;
  }
  Vector point(std::size_t n, const Box& box) { return uniform(n, box.lo, box.hi); }
  /// Tangent-sized random vector in [-1, 1]^n.
  Vector direction(std::size_t n) { return uniform(n, -1.0, 1.0); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace sprayconn
