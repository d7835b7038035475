#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vpr/matching.hpp"

namespace vpr {

// 3x3 weights indexed [row offset + 1][query slot], where query slot 0, 1, 2
// are columns j-2, j-1, j. Only past and present queries contribute.
using SmoothingKernel = std::array<std::array<double, 3>, 3>;

inline constexpr SmoothingKernel kBoxKernel{{{1.0 / 9, 1.0 / 9, 1.0 / 9},
                                             {1.0 / 9, 1.0 / 9, 1.0 / 9},
                                             {1.0 / 9, 1.0 / 9, 1.0 / 9}}};

// Default: [1, 2, 1] / 4 across refs times (0, 1/4, 3/4) across queries.
// The flat box blurs the notch away near the ends of a route.
inline constexpr SmoothingKernel kDefaultKernel{{{0.0, 0.0625, 0.1875},
                                                 {0.0, 0.125, 0.375},
                                                 {0.0, 0.0625, 0.1875}}};

struct GradientMatrix {
  Eigen::MatrixXd values;  // smoothed
  Eigen::MatrixXd raw;
  SmoothingKernel kernel = kDefaultKernel;

  std::size_t refs() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t queries() const { return static_cast<std::size_t>(values.cols()); }
  std::span<const double> column(std::size_t query) const;
};

// Modified average gradient of one distance column:
//   g[i]   = (d[i+1] + d[i-1]) / 2 - d[i]   for interior i
//   g[0]   = d[1] - d[0]
//   g[n-1] = d[n-2] - d[n-1]
// It peaks where d has a sharp notch, i.e. around the best match.
std::vector<double> gradient_vector(std::span<const double> d);

// Smooths column j from raw columns j-2, j-1, j. Pass an empty span for a
// missing past column (the first two queries); it is replaced by a constant
// column holding the mean of `current`. Rows are edge-replicated.
std::vector<double> smooth_column(std::span<const double> current, std::span<const double> prev1,
                                  std::span<const double> prev2, const SmoothingKernel& kernel = kDefaultKernel);

Eigen::MatrixXd smooth_gradient(const Eigen::MatrixXd& raw, const SmoothingKernel& kernel = kDefaultKernel);

GradientMatrix gradient_matrix(const DistanceMatrix& d, const SmoothingKernel& kernel = kDefaultKernel);

struct PredictionVector {
  std::vector<std::uint8_t> values;  // 1 = predicted in tolerance
  std::vector<std::size_t> i_d0;     // distance argmin per query
  std::vector<std::size_t> i_g0;     // smoothed gradient argmax per query

  std::size_t size() const { return values.size(); }
  std::size_t accepted() const;
  // Throws unless values[j] == (|i_g0[j] - i_d0[j]| <= 1) for every j.
  void check_invariant() const;
};

inline bool consensus(std::size_t i_d0, std::size_t i_g0) {
  return (i_d0 > i_g0 ? i_d0 - i_g0 : i_g0 - i_d0) <= 1;
}

PredictionVector consensus_predict(const DistanceMatrix& d, const GradientMatrix& g);

// Match from the smoothed-gradient maximum alone; score is that maximum.
MatchCandidate gradient_only_match(const GradientMatrix& g, std::size_t query);

struct MaskedMatches {
  std::vector<MatchCandidate> kept;
  std::vector<MatchCandidate> abstentions;  // rejected candidates, pre-abstention
};

MaskedMatches mask_matches(std::span<const MatchCandidate> candidates, std::span<const std::uint8_t> y_pred);

// Query-at-a-time predictor. Holds the two previous raw gradient columns, so
// feeding columns 0..m-1 in order reproduces consensus_predict bit for bit.
class StreamingPredictor {
 public:
  struct Step {
    std::size_t i_d0 = 0;
    std::size_t i_g0 = 0;
    bool good = false;
    double d0 = 0.0;
  };

  explicit StreamingPredictor(const SmoothingKernel& kernel = kDefaultKernel) : kernel_(kernel) {}

  Step push(std::span<const double> distances);
  std::size_t processed() const { return processed_; }

 private:
  SmoothingKernel kernel_;
  std::vector<double> prev1_, prev2_;
  std::size_t processed_ = 0;
};

}  // namespace vpr
