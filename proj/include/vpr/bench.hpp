#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

namespace vpr {

// Per-query inference latency of the two stages, measured on synthetic
// traverses. Timing covers only in-memory work on a precomputed distance
// column: no file I/O, no descriptor extraction, no distance computation.
struct BenchConfig {
  std::vector<std::size_t> n_refs{200, 600, 1000, 1400, 1800};
  std::size_t queries = 200;
  std::size_t reps = 3;
  std::size_t seq_len = 3;
  double w = 0.99;
  std::size_t descriptor_dim = 64;
  std::uint64_t seed = 42;
  // Reference sizes measured concurrently. 1 keeps timings stable.
  std::size_t threads = 1;

  void validate() const;
};

struct LatencyStats {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p99_ms = 0.0;
};

LatencyStats summarize(std::vector<double> samples_ms);

struct BenchPoint {
  std::size_t n_refs = 0;
  LatencyStats prediction;  // gradient, smoothing, consensus
  LatencyStats sequence;    // weighting, trailing-diagonal scores, argmin
  LatencyStats combined;
  // Sum of matched reference indices over all reps; identical reps perform
  // identical work.
  std::uint64_t checksum = 0;
  std::vector<std::uint64_t> rep_checksums;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct BenchReport {
  BenchConfig config;
  std::vector<BenchPoint> points;
  LinearFit combined_fit;  // combined mean ms against n_refs

  nlohmann::json to_json() const;
};

BenchReport bench(const BenchConfig& cfg);

}  // namespace vpr
