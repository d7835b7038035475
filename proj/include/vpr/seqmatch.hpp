#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "vpr/matching.hpp"
#include "vpr/predictor.hpp"

namespace vpr {

// global: D_min is the minimum of the whole matrix (offline).
// running: D_min is the minimum over the columns seen so far, current included.
enum class DminMode { global, running };

// How trailing diagonals that leave the matrix are completed.
// replicate: clamp indices to 0, so every score sums exactly L terms.
// zero: out-of-range terms contribute nothing.
enum class SequenceBoundary { replicate, zero };

DminMode parse_dmin_mode(std::string_view name);
std::string_view dmin_mode_name(DminMode mode);
SequenceBoundary parse_boundary(std::string_view name);
std::string_view boundary_name(SequenceBoundary b);

inline constexpr double kDefaultWeight = 0.99;
inline constexpr std::size_t kDefaultSeqLen = 2;

struct WeightedDistanceMatrix {
  Eigen::MatrixXd values;
  double w = 0.0;
  double d_min = 0.0;                // global minimum of the source matrix
  DminMode mode = DminMode::global;
  std::vector<double> column_d_min;  // D_min actually used for each query

  std::size_t refs() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t queries() const { return static_cast<std::size_t>(values.cols()); }
};

// d0 pulled toward d_min: d0 - w (d0 - d_min), exactly d_min at w = 1 and
// exactly d0 at w = 0, never below d_min.
double weighted_minimum(double d0, double d_min, double w);

// Rewrites only (argmin_i D[:,j], j) for queries with pred[j] == 1.
WeightedDistanceMatrix weight_matrix(const DistanceMatrix& d, std::span<const std::uint8_t> pred, double w,
                                     DminMode mode = DminMode::global);
WeightedDistanceMatrix weight_matrix(const DistanceMatrix& d, const PredictionVector& pred, double w,
                                     DminMode mode = DminMode::global);

struct SequenceScoreMatrix {
  Eigen::MatrixXd values;
  std::size_t seq_len = 1;
  SequenceBoundary boundary = SequenceBoundary::replicate;

  std::size_t refs() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t queries() const { return static_cast<std::size_t>(values.cols()); }
};

// values(i, j) = sum_{k=0}^{L-1} Dw(i-k, j-k): the diagonal of length L that
// ends at the current query, so scores never look ahead.
SequenceScoreMatrix sequence_scores(const Eigen::MatrixXd& weighted, std::size_t seq_len,
                                    SequenceBoundary boundary = SequenceBoundary::replicate);
SequenceScoreMatrix sequence_scores(const WeightedDistanceMatrix& weighted, std::size_t seq_len,
                                    SequenceBoundary boundary = SequenceBoundary::replicate);

using SequenceMatch = MatchCandidate;

SequenceMatch best_sequence_match(const SequenceScoreMatrix& s, std::size_t query);
std::vector<SequenceMatch> best_sequence_matches(const SequenceScoreMatrix& s);

// Query-at-a-time weighting + sequence scoring. With DminMode::running it
// matches weight_matrix(..., running) followed by sequence_scores bitwise;
// DminMode::global needs the matrix minimum up front.
class StreamingSequenceMatcher {
 public:
  struct Options {
    double w = kDefaultWeight;
    std::size_t seq_len = kDefaultSeqLen;
    DminMode mode = DminMode::running;
    SequenceBoundary boundary = SequenceBoundary::replicate;
    std::optional<double> global_d_min;
  };

  explicit StreamingSequenceMatcher(Options options);

  SequenceMatch push(std::span<const double> distances, bool predicted_good);
  // Scores of the most recent push, one per reference.
  const std::vector<double>& last_scores() const { return scores_; }
  std::size_t processed() const { return processed_; }

 private:
  Options opt_;
  std::deque<std::vector<double>> history_;  // newest first, at most seq_len columns
  std::vector<double> scores_;
  double running_min_ = 0.0;
  std::size_t processed_ = 0;
};

}  // namespace vpr
