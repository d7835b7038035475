#pragma once

#include <cstdint>
#include <random>

namespace vpr {

// Reproducible random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; the distributions below are
// implemented here rather than taken from <random>, whose algorithms vary
// between standard libraries.
//   uniform01: top 53 bits of one draw, scaled by 2^-53, in [0, 1).
//   normal:    Box-Muller on two uniform01 draws, one value per call.
//   below(k):  Lemire's multiply-shift with rejection, unbiased in [0, k).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform01();
  double normal(double mean = 0.0, double stddev = 1.0);
  std::uint64_t below(std::uint64_t bound);
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vpr
