#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vpr/matching.hpp"

namespace vpr {

inline constexpr double kDefaultAucRecall = 0.2;
inline constexpr std::size_t kDefaultTolerance = 1;

struct GroundTruth {
  std::vector<std::size_t> gt_ref;  // true reference per query
  std::size_t tolerance = kDefaultTolerance;

  std::size_t queries() const { return gt_ref.size(); }
  bool in_tolerance(std::size_t query, std::size_t ref) const;
  // Throws unless every gt_ref < n_refs.
  void validate(std::size_t n_refs) const;
};

GroundTruth load_ground_truth(const std::filesystem::path& path, std::size_t tolerance = kDefaultTolerance);
void save_ground_truth(const std::filesystem::path& path, const GroundTruth& gt);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  // 0 when the denominator is empty.
  double precision() const;
  double recall() const;
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// Accepted in tolerance -> TP, accepted outside -> FP, abstained but the
// discarded candidate was in tolerance -> FN. Abstentions with an
// out-of-tolerance candidate are true negatives and are not counted. Every
// query of `gt` must appear exactly once across both lists.
Confusion confusion(std::span<const MatchCandidate> matches, std::span<const MatchCandidate> abstentions,
                    const GroundTruth& gt);

enum class ScoreDirection { min_is_best, max_is_best };
ScoreDirection parse_direction(std::string_view name);
std::string_view direction_name(ScoreDirection d);

struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;
  double threshold = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  friend bool operator==(const PRPoint&, const PRPoint&) = default;
};

struct PRCurve {
  std::vector<PRPoint> points;  // strictest threshold first
  double auc_20r = 0.0;
  double auc_recall = kDefaultAucRecall;

  double max_recall() const { return points.empty() ? 0.0 : points.back().recall; }
};

// Sweeps the threshold over the distinct scores of `matches` (MatchCandidate
// score), accepting the best side inclusively. Matches outside the threshold
// and all `abstentions` are treated as discarded. Curves of masked systems end
// below recall 1.
PRCurve pr_curve(std::span<const MatchCandidate> matches, std::span<const MatchCandidate> abstentions,
                 const GroundTruth& gt, ScoreDirection direction, double auc_recall = kDefaultAucRecall);

// Trapezoidal area under precision(recall) on [0, min(r_max, max recall)],
// divided by r_max. The curve is extended to recall 0 with the precision of
// its first point.
double auc_at_recall(std::span<const PRPoint> points, double r_max = kDefaultAucRecall);
double auc_at_recall(const PRCurve& curve, double r_max = kDefaultAucRecall);

struct OperatingPoint {
  std::string label;
  PRPoint point;
};

struct EvalReport {
  PRCurve curve;
  std::vector<OperatingPoint> operating_points;
  nlohmann::json config = nlohmann::json::object();

  nlohmann::json to_json() const;
  // "recall,precision,threshold" header plus one line per curve point.
  std::string curve_csv() const;
};

// Operating points: "loosest" (every match accepted) and "at_auc_recall"
// (first point reaching the AUC recall bound, else the last point).
EvalReport make_report(PRCurve curve, nlohmann::json config);

}  // namespace vpr
