#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "vpr/descriptors.hpp"

namespace vpr {

// `sad` is the mean absolute difference, used with the built-in SAD front end.
enum class Metric { euclidean, cosine, sad };

Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric m);

// n x m distances, rows = references, columns = queries. Column-major storage,
// so `column(j)` is contiguous.
class DistanceMatrix {
 public:
  // Validates n >= 2, m >= 1, all entries finite and >= 0.
  DistanceMatrix(Eigen::MatrixXd values, Metric metric);

  std::size_t refs() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t queries() const { return static_cast<std::size_t>(values_.cols()); }
  Metric metric() const { return metric_; }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(std::size_t ref, std::size_t query) const {
    return values_(static_cast<Eigen::Index>(ref), static_cast<Eigen::Index>(query));
  }
  std::span<const double> column(std::size_t query) const;

  // Number of cosine comparisons against a zero vector (distance set to 1).
  std::size_t zero_vector_count() const { return zero_vector_count_; }
  void set_zero_vector_count(std::size_t count) { zero_vector_count_ = count; }

 private:
  Eigen::MatrixXd values_;
  Metric metric_;
  std::size_t zero_vector_count_ = 0;
};

struct MatchCandidate {
  std::size_t query = 0;
  std::size_t ref = 0;
  double score = 0.0;

  friend bool operator==(const MatchCandidate&, const MatchCandidate&) = default;
};

double descriptor_distance(std::span<const double> a, std::span<const double> b, Metric metric,
                           bool* zero_vector = nullptr);

DistanceMatrix distance_matrix(const DescriptorSet& refs, const DescriptorSet& queries, Metric metric);

// One distance column against every reference, for streaming use.
std::vector<double> distance_vector(const DescriptorSet& refs, std::span<const double> query, Metric metric);

// Smallest index attaining the minimum / maximum; `values` must be non-empty.
std::size_t argmin(std::span<const double> values);
std::size_t argmax(std::span<const double> values);

MatchCandidate best_match(const DistanceMatrix& d, std::size_t query);
std::vector<MatchCandidate> best_matches(const DistanceMatrix& d);

}  // namespace vpr
