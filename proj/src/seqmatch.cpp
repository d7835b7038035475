#include "vpr/seqmatch.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vpr/error.hpp"

namespace vpr {
namespace {

constexpr const char* kModule = "seqmatch";

void check_weight(double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw ValidationError(kModule, "weighting factor must lie in [0,1], got " + std::to_string(w));
}

// Trailing-diagonal sums for query j. `column(c)` yields weighted column c for
// j - seq_len < c <= j (and c = 0).
template <typename ColumnAt>
void score_column(std::size_t j, std::size_t n, std::size_t seq_len, SequenceBoundary boundary, ColumnAt column,
                  double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < seq_len; ++k) {
      if (boundary == SequenceBoundary::zero && (k > i || k > j)) continue;
      const std::size_t ii = k > i ? 0 : i - k;
      const std::size_t jj = k > j ? 0 : j - k;
      acc += column(jj)[ii];
    }
    out[i] = acc;
  }
}

void check_seq_len(std::size_t seq_len, std::size_t n, std::size_t m) {
  if (seq_len < 1 || seq_len > std::min(n, m))
    throw ValidationError(kModule, "sequence length " + std::to_string(seq_len) + " outside [1, " +
                                       std::to_string(std::min(n, m)) + "]");
}

}  // namespace

DminMode parse_dmin_mode(std::string_view name) {
  if (name == "global") return DminMode::global;
  if (name == "running") return DminMode::running;
  throw ValidationError(kModule, "unknown D_min mode '" + std::string(name) + "'");
}

std::string_view dmin_mode_name(DminMode mode) { return mode == DminMode::global ? "global" : "running"; }

SequenceBoundary parse_boundary(std::string_view name) {
  if (name == "replicate") return SequenceBoundary::replicate;
  if (name == "zero") return SequenceBoundary::zero;
  throw ValidationError(kModule, "unknown sequence boundary '" + std::string(name) + "'");
}

std::string_view boundary_name(SequenceBoundary b) { return b == SequenceBoundary::replicate ? "replicate" : "zero"; }

double weighted_minimum(double d0, double d_min, double w) {
  if (w == 1.0) return d_min;
  return std::max(d0 - w * (d0 - d_min), d_min);
}

WeightedDistanceMatrix weight_matrix(const DistanceMatrix& d, std::span<const std::uint8_t> pred, double w,
                                     DminMode mode) {
  check_weight(w);
  if (pred.size() != d.queries())
    throw ValidationError(kModule, "prediction length " + std::to_string(pred.size()) + " != query count " +
                                       std::to_string(d.queries()));
  WeightedDistanceMatrix out;
  out.values = d.values();
  out.w = w;
  out.mode = mode;
  out.d_min = d.values().minCoeff();
  out.column_d_min.resize(d.queries());

  double running = 0.0;
  for (std::size_t j = 0; j < d.queries(); ++j) {
    const auto col = d.column(j);
    const auto i_d0 = argmin(col);
    running = j == 0 ? col[i_d0] : std::min(running, col[i_d0]);
    const double d_min = mode == DminMode::global ? out.d_min : running;
    out.column_d_min[j] = d_min;
    if (pred[j]) out.values(static_cast<Eigen::Index>(i_d0), static_cast<Eigen::Index>(j)) = weighted_minimum(col[i_d0], d_min, w);
  }
  return out;
}

WeightedDistanceMatrix weight_matrix(const DistanceMatrix& d, const PredictionVector& pred, double w, DminMode mode) {
  return weight_matrix(d, std::span<const std::uint8_t>(pred.values), w, mode);
}

SequenceScoreMatrix sequence_scores(const Eigen::MatrixXd& weighted, std::size_t seq_len, SequenceBoundary boundary) {
  const auto n = static_cast<std::size_t>(weighted.rows());
  const auto m = static_cast<std::size_t>(weighted.cols());
  check_seq_len(seq_len, n, m);
  if (!weighted.allFinite()) throw ValidationError(kModule, "weighted matrix has non-finite entries");

  SequenceScoreMatrix s;
  s.seq_len = seq_len;
  s.boundary = boundary;
  s.values.resize(weighted.rows(), weighted.cols());
  const auto column = [&](std::size_t c) { return weighted.col(static_cast<Eigen::Index>(c)).data(); };
  for (std::size_t j = 0; j < m; ++j)
    score_column(j, n, seq_len, boundary, column, s.values.col(static_cast<Eigen::Index>(j)).data());
  return s;
}

SequenceScoreMatrix sequence_scores(const WeightedDistanceMatrix& weighted, std::size_t seq_len,
                                    SequenceBoundary boundary) {
  return sequence_scores(weighted.values, seq_len, boundary);
}

SequenceMatch best_sequence_match(const SequenceScoreMatrix& s, std::size_t query) {
  if (query >= s.queries()) throw ValidationError(kModule, "query index " + std::to_string(query) + " out of range");
  const std::span<const double> col(s.values.col(static_cast<Eigen::Index>(query)).data(), s.refs());
  const auto ref = argmin(col);
  return {query, ref, col[ref]};
}

std::vector<SequenceMatch> best_sequence_matches(const SequenceScoreMatrix& s) {
  std::vector<SequenceMatch> out;
  out.reserve(s.queries());
  for (std::size_t j = 0; j < s.queries(); ++j) out.push_back(best_sequence_match(s, j));
  return out;
}

StreamingSequenceMatcher::StreamingSequenceMatcher(Options options) : opt_(options) {
  check_weight(opt_.w);
  if (opt_.seq_len < 1) throw ValidationError(kModule, "sequence length must be >= 1");
  if (opt_.mode == DminMode::global && !opt_.global_d_min)
    throw ValidationError(kModule, "global D_min mode needs the matrix minimum in advance");
}

SequenceMatch StreamingSequenceMatcher::push(std::span<const double> distances, bool predicted_good) {
  const auto n = distances.size();
  if (n < opt_.seq_len) throw ValidationError(kModule, "fewer references than the sequence length");
  if (!history_.empty() && history_.front().size() != n)
    throw ValidationError(kModule, "distance column length changed mid-stream");

  std::vector<double> col(distances.begin(), distances.end());
  const auto i_d0 = argmin(col);
  running_min_ = processed_ == 0 ? col[i_d0] : std::min(running_min_, col[i_d0]);
  const double d_min = opt_.mode == DminMode::global ? *opt_.global_d_min : running_min_;
  if (predicted_good) col[i_d0] = weighted_minimum(col[i_d0], d_min, opt_.w);

  history_.push_front(std::move(col));
  if (history_.size() > opt_.seq_len) history_.pop_back();

  const std::size_t j = processed_;
  const auto column = [&](std::size_t c) { return history_[std::min(j - c, history_.size() - 1)].data(); };
  scores_.resize(n);
  score_column(j, n, opt_.seq_len, opt_.boundary, column, scores_.data());
  ++processed_;

  const auto ref = argmin(scores_);
  return {j, ref, scores_[ref]};
}

}  // namespace vpr
