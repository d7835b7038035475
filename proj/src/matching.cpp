#include "vpr/matching.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vpr/error.hpp"

namespace vpr {
namespace {

constexpr const char* kModule = "matching";

double cosine_distance(std::span<const double> a, std::span<const double> b, bool* zero_vector) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) {
    if (zero_vector) *zero_vector = true;
    return 1.0;
  }
  const double sim = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(1.0 - sim, 0.0, 2.0);
}

}  // namespace

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "cosine") return Metric::cosine;
  if (name == "sad") return Metric::sad;
  throw ValidationError(kModule, "unknown metric '" + std::string(name) + "'");
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::euclidean: return "euclidean";
    case Metric::cosine: return "cosine";
    case Metric::sad: return "sad";
  }
  return "unknown";
}

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd values, Metric metric) : values_(std::move(values)), metric_(metric) {
  if (values_.rows() < 2) throw ValidationError(kModule, "distance matrix needs at least 2 references");
  if (values_.cols() < 1) throw ValidationError(kModule, "distance matrix needs at least 1 query");
  for (Eigen::Index j = 0; j < values_.cols(); ++j)
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      const double v = values_(i, j);
      if (!std::isfinite(v) || v < 0.0)
        throw ValidationError(kModule, "distance at ref " + std::to_string(i) + ", query " + std::to_string(j) +
                                           " must be finite and non-negative");
    }
}

std::span<const double> DistanceMatrix::column(std::size_t query) const {
  if (query >= queries()) throw ValidationError(kModule, "query index " + std::to_string(query) + " out of range");
  return {values_.col(static_cast<Eigen::Index>(query)).data(), refs()};
}

double descriptor_distance(std::span<const double> a, std::span<const double> b, Metric metric, bool* zero_vector) {
  if (a.size() != b.size()) throw ValidationError(kModule, "descriptor dimension mismatch");
  switch (metric) {
    case Metric::euclidean: {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
      }
      return std::sqrt(acc);
    }
    case Metric::sad: {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) acc += std::abs(a[k] - b[k]);
      return acc / static_cast<double>(a.size());
    }
    case Metric::cosine:
      return cosine_distance(a, b, zero_vector);
  }
  return 0.0;
}

DistanceMatrix distance_matrix(const DescriptorSet& refs, const DescriptorSet& queries, Metric metric) {
  if (refs.size() < 2) throw ValidationError(kModule, "need at least 2 reference descriptors");
  if (queries.size() < 1) throw ValidationError(kModule, "need at least 1 query descriptor");
  if (refs.dimension() != queries.dimension())
    throw ValidationError(kModule, "reference dimension " + std::to_string(refs.dimension()) +
                                       " != query dimension " + std::to_string(queries.dimension()));
  const auto n = refs.size();
  const auto m = queries.size();
  const auto dim = refs.dimension();
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  std::size_t zero_hits = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const std::span<const double> q(queries.columns().col(static_cast<Eigen::Index>(j)).data(), dim);
    for (std::size_t i = 0; i < n; ++i) {
      const std::span<const double> r(refs.columns().col(static_cast<Eigen::Index>(i)).data(), dim);
      bool zero = false;
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = descriptor_distance(r, q, metric, &zero);
      zero_hits += zero ? 1 : 0;
    }
  }
  DistanceMatrix d(std::move(values), metric);
  d.set_zero_vector_count(zero_hits);
  return d;
}

std::vector<double> distance_vector(const DescriptorSet& refs, std::span<const double> query, Metric metric) {
  if (query.size() != refs.dimension()) throw ValidationError(kModule, "query dimension mismatch");
  std::vector<double> out(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i)
    out[i] = descriptor_distance({refs.columns().col(static_cast<Eigen::Index>(i)).data(), refs.dimension()}, query, metric);
  return out;
}

std::size_t argmin(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[best]) best = i;
  return best;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

MatchCandidate best_match(const DistanceMatrix& d, std::size_t query) {
  const auto col = d.column(query);
  const auto ref = argmin(col);
  return {query, ref, col[ref]};
}

std::vector<MatchCandidate> best_matches(const DistanceMatrix& d) {
  std::vector<MatchCandidate> out;
  out.reserve(d.queries());
  for (std::size_t j = 0; j < d.queries(); ++j) out.push_back(best_match(d, j));
  return out;
}

}  // namespace vpr
