#include "vpr/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vpr/error.hpp"

namespace vpr {
namespace {

constexpr const char* kModule = "predictor";

std::span<const double> col_span(const Eigen::MatrixXd& m, Eigen::Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

}  // namespace

std::span<const double> GradientMatrix::column(std::size_t query) const {
  if (query >= queries()) throw ValidationError(kModule, "query index " + std::to_string(query) + " out of range");
  return col_span(values, static_cast<Eigen::Index>(query));
}

std::vector<double> gradient_vector(std::span<const double> d) {
  const auto n = d.size();
  if (n < 2) throw ValidationError(kModule, "gradient needs at least 2 references");
  std::vector<double> g(n);
  g[0] = d[1] - d[0];
  for (std::size_t i = 1; i + 1 < n; ++i) g[i] = 0.5 * (d[i + 1] + d[i - 1]) - d[i];
  g[n - 1] = d[n - 2] - d[n - 1];
  return g;
}

std::vector<double> smooth_column(std::span<const double> current, std::span<const double> prev1,
                                  std::span<const double> prev2, const SmoothingKernel& kernel) {
  const auto n = current.size();
  if (n == 0) throw ValidationError(kModule, "empty gradient column");
  if ((!prev1.empty() && prev1.size() != n) || (!prev2.empty() && prev2.size() != n))
    throw ValidationError(kModule, "gradient columns differ in length");

  const double pad = std::accumulate(current.begin(), current.end(), 0.0) / static_cast<double>(n);
  const std::array<std::span<const double>, 3> slots{prev2, prev1, current};

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::array<std::size_t, 3> rows{i == 0 ? 0 : i - 1, i, i + 1 < n ? i + 1 : n - 1};
    double acc = 0.0;
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t s = 0; s < 3; ++s) {
        const double v = slots[s].empty() ? pad : slots[s][rows[r]];
        acc += kernel[r][s] * v;
      }
    out[i] = acc;
  }
  return out;
}

Eigen::MatrixXd smooth_gradient(const Eigen::MatrixXd& raw, const SmoothingKernel& kernel) {
  if (raw.size() == 0) throw ValidationError(kModule, "empty gradient matrix");
  if (!raw.allFinite()) throw ValidationError(kModule, "gradient matrix has non-finite entries");
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const auto prev1 = j >= 1 ? col_span(raw, j - 1) : std::span<const double>{};
    const auto prev2 = j >= 2 ? col_span(raw, j - 2) : std::span<const double>{};
    const auto col = smooth_column(col_span(raw, j), prev1, prev2, kernel);
    std::copy(col.begin(), col.end(), out.col(j).data());
  }
  return out;
}

GradientMatrix gradient_matrix(const DistanceMatrix& d, const SmoothingKernel& kernel) {
  GradientMatrix g;
  g.kernel = kernel;
  g.raw.resize(static_cast<Eigen::Index>(d.refs()), static_cast<Eigen::Index>(d.queries()));
  for (std::size_t j = 0; j < d.queries(); ++j) {
    const auto col = gradient_vector(d.column(j));
    std::copy(col.begin(), col.end(), g.raw.col(static_cast<Eigen::Index>(j)).data());
  }
  g.values = smooth_gradient(g.raw, kernel);
  return g;
}

std::size_t PredictionVector::accepted() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

void PredictionVector::check_invariant() const {
  if (i_d0.size() != values.size() || i_g0.size() != values.size())
    throw ValidationError(kModule, "prediction vector fields differ in length");
  for (std::size_t j = 0; j < values.size(); ++j)
    if (values[j] != (consensus(i_d0[j], i_g0[j]) ? 1 : 0))
      throw ValidationError(kModule, "prediction at query " + std::to_string(j) + " contradicts its argmin/argmax");
}

PredictionVector consensus_predict(const DistanceMatrix& d, const GradientMatrix& g) {
  if (g.refs() != d.refs() || g.queries() != d.queries())
    throw ValidationError(kModule, "gradient matrix shape does not match distance matrix");
  PredictionVector p;
  const auto m = d.queries();
  p.values.resize(m);
  p.i_d0.resize(m);
  p.i_g0.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    p.i_d0[j] = argmin(d.column(j));
    p.i_g0[j] = argmax(g.column(j));
    p.values[j] = consensus(p.i_d0[j], p.i_g0[j]) ? 1 : 0;
  }
  return p;
}

MatchCandidate gradient_only_match(const GradientMatrix& g, std::size_t query) {
  const auto col = g.column(query);
  const auto ref = argmax(col);
  return {query, ref, col[ref]};
}

MaskedMatches mask_matches(std::span<const MatchCandidate> candidates, std::span<const std::uint8_t> y_pred) {
  if (candidates.size() != y_pred.size())
    throw ValidationError(kModule, "mask length " + std::to_string(y_pred.size()) + " != candidate count " +
                                       std::to_string(candidates.size()));
  MaskedMatches out;
  for (std::size_t k = 0; k < candidates.size(); ++k) (y_pred[k] ? out.kept : out.abstentions).push_back(candidates[k]);
  return out;
}

StreamingPredictor::Step StreamingPredictor::push(std::span<const double> distances) {
  if (!prev1_.empty() && distances.size() != prev1_.size())
    throw ValidationError(kModule, "distance column length changed mid-stream");
  for (double v : distances)
    if (!std::isfinite(v)) throw ValidationError(kModule, "non-finite distance in streamed column");
  auto raw = gradient_vector(distances);
  const auto smoothed = smooth_column(raw, prev1_, prev2_, kernel_);

  Step step;
  step.i_d0 = argmin(distances);
  step.i_g0 = argmax(smoothed);
  step.good = consensus(step.i_d0, step.i_g0);
  step.d0 = distances[step.i_d0];

  prev2_ = std::move(prev1_);
  prev1_ = std::move(raw);
  ++processed_;
  return step;
}

}  // namespace vpr
