#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vpr/descriptors.hpp"
#include "vpr/eval.hpp"
#include "vpr/matching.hpp"

namespace vpr {

// Synthetic traverse with known ground truth.
//
// References follow a Gaussian random walk: r_0 ~ N(0, 1)^dim and
// r_{i+1} = r_i + N(0, step_sigma^2)^dim, so neighbouring frames are
// correlated the way consecutive camera frames are. Query j observes
// reference gt[j] plus N(0, noise_sigma^2) per dimension. gt[j] follows the
// reference index proportionally, offset by a bounded integer walk in
// [-drift, drift]. With probability alias_rate a query is additionally pulled
// a fraction alias_strength of the way toward a distant reference, which makes
// its nearest descriptor a wrong place.
struct SynthConfig {
  std::size_t n_refs = 500;
  std::size_t n_queries = 0;  // 0: same as n_refs
  std::size_t descriptor_dim = 64;
  double noise_sigma = 0.2;
  double alias_rate = 0.1;
  std::size_t drift = 0;
  double step_sigma = 0.1;
  double alias_strength = 0.8;
  std::uint64_t seed = 42;

  void validate() const;
  std::size_t queries() const { return n_queries == 0 ? n_refs : n_queries; }
};

struct Traverse {
  DescriptorSet refs;
  DescriptorSet queries;
  GroundTruth gt;
  std::vector<std::uint8_t> aliased;  // 1 where the query was pulled to a distant place
};

Traverse generate_traverse(const SynthConfig& cfg);

struct PredictorQualityConfig {
  double flip_good_to_bad = 0.0;  // P(1 -> 0)
  double flip_bad_to_good = 0.0;  // P(0 -> 1)
  std::uint64_t seed = 7;

  void validate() const;
};

// Independently flips each prediction bit with the probability for its value.
std::vector<std::uint8_t> degrade_predictions(std::span<const std::uint8_t> pred, const PredictorQualityConfig& cfg);

// y = 1 exactly where the candidate lies within ground-truth tolerance.
std::vector<std::uint8_t> perfect_predictions(std::span<const MatchCandidate> candidates, const GroundTruth& gt);

}  // namespace vpr
