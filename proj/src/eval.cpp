#include "vpr/eval.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "vpr/error.hpp"
#include "vpr/matrix_io.hpp"

namespace vpr {
namespace {

constexpr const char* kModule = "eval";

void mark_seen(std::vector<std::uint8_t>& seen, std::size_t query) {
  if (query >= seen.size()) throw ValidationError(kModule, "query " + std::to_string(query) + " has no ground truth");
  if (seen[query]) throw ValidationError(kModule, "query " + std::to_string(query) + " counted twice");
  seen[query] = 1;
}

bool better_or_equal(double score, double threshold, ScoreDirection dir) {
  return dir == ScoreDirection::min_is_best ? score <= threshold : score >= threshold;
}

std::string fmt_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

bool GroundTruth::in_tolerance(std::size_t query, std::size_t ref) const {
  if (query >= gt_ref.size()) throw ValidationError(kModule, "query " + std::to_string(query) + " has no ground truth");
  const auto truth = gt_ref[query];
  return (ref > truth ? ref - truth : truth - ref) <= tolerance;
}

void GroundTruth::validate(std::size_t n_refs) const {
  for (std::size_t j = 0; j < gt_ref.size(); ++j)
    if (gt_ref[j] >= n_refs)
      throw ValidationError(kModule, "ground truth for query " + std::to_string(j) + " is reference " +
                                         std::to_string(gt_ref[j]) + ", but only " + std::to_string(n_refs) +
                                         " references exist");
}

GroundTruth load_ground_truth(const std::filesystem::path& path, std::size_t tolerance) {
  GroundTruth gt;
  gt.tolerance = tolerance;
  for (auto v : load_integer_column(path)) gt.gt_ref.push_back(static_cast<std::size_t>(v));
  return gt;
}

void save_ground_truth(const std::filesystem::path& path, const GroundTruth& gt) {
  std::vector<std::int64_t> values(gt.gt_ref.begin(), gt.gt_ref.end());
  save_integer_column(path, values);
}

double Confusion::precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
double Confusion::recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }

Confusion confusion(std::span<const MatchCandidate> matches, std::span<const MatchCandidate> abstentions,
                    const GroundTruth& gt) {
  std::vector<std::uint8_t> seen(gt.queries(), 0);
  Confusion c;
  for (const auto& m : matches) {
    mark_seen(seen, m.query);
    (gt.in_tolerance(m.query, m.ref) ? c.tp : c.fp) += 1;
  }
  for (const auto& a : abstentions) {
    mark_seen(seen, a.query);
    if (gt.in_tolerance(a.query, a.ref)) ++c.fn;
  }
  const auto missing = std::find(seen.begin(), seen.end(), std::uint8_t{0});
  if (missing != seen.end())
    throw ValidationError(kModule, "query " + std::to_string(missing - seen.begin()) + " is neither matched nor abstained");
  return c;
}

ScoreDirection parse_direction(std::string_view name) {
  if (name == "min_is_best" || name == "min") return ScoreDirection::min_is_best;
  if (name == "max_is_best" || name == "max") return ScoreDirection::max_is_best;
  throw ValidationError(kModule, "unknown score direction '" + std::string(name) + "'");
}

std::string_view direction_name(ScoreDirection d) { return d == ScoreDirection::min_is_best ? "min_is_best" : "max_is_best"; }

PRCurve pr_curve(std::span<const MatchCandidate> matches, std::span<const MatchCandidate> abstentions,
                 const GroundTruth& gt, ScoreDirection direction, double auc_recall) {
  if (matches.empty()) throw ValidationError(kModule, "no scored matches to sweep");
  // Validates coverage and duplicate queries as a side effect.
  const auto all = confusion(matches, abstentions, gt);
  const std::size_t positives = all.tp + all.fn;

  std::vector<std::size_t> order(matches.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return direction == ScoreDirection::min_is_best ? matches[a].score < matches[b].score
                                                    : matches[a].score > matches[b].score;
  });

  PRCurve curve;
  curve.auc_recall = auc_recall;
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double threshold = matches[order[k]].score;
    while (k < order.size() && better_or_equal(matches[order[k]].score, threshold, direction)) {
      const auto& m = matches[order[k]];
      (gt.in_tolerance(m.query, m.ref) ? tp : fp) += 1;
      ++k;
    }
    const Confusion c{tp, fp, positives - tp};
    curve.points.push_back({c.recall(), c.precision(), threshold, c.tp, c.fp, c.fn});
  }
  curve.auc_20r = auc_at_recall(curve.points, auc_recall);
  return curve;
}

double auc_at_recall(std::span<const PRPoint> points, double r_max) {
  if (!(r_max > 0.0)) throw ValidationError(kModule, "AUC recall bound must be positive");
  if (points.empty()) throw ValidationError(kModule, "empty PR curve");

  double area = 0.0;
  double r0 = 0.0;
  double p0 = points.front().precision;
  for (const auto& pt : points) {
    if (r0 >= r_max) break;
    const double r1 = pt.recall;
    const double p1 = pt.precision;
    if (r1 > r0) {
      if (r1 > r_max) {
        const double p_cut = p0 + (p1 - p0) * (r_max - r0) / (r1 - r0);
        area += (r_max - r0) * (p0 + p_cut) / 2.0;
        r0 = r_max;
        break;
      }
      area += (r1 - r0) * (p0 + p1) / 2.0;
    }
    r0 = std::max(r0, r1);
    p0 = p1;
  }
  return std::clamp(area / r_max, 0.0, 1.0);
}

double auc_at_recall(const PRCurve& curve, double r_max) { return auc_at_recall(curve.points, r_max); }

EvalReport make_report(PRCurve curve, nlohmann::json config) {
  EvalReport report;
  if (!curve.points.empty()) {
    report.operating_points.push_back({"loosest", curve.points.back()});
    const auto it = std::find_if(curve.points.begin(), curve.points.end(),
                                 [&](const PRPoint& p) { return p.recall >= curve.auc_recall; });
    report.operating_points.push_back({"at_auc_recall", it != curve.points.end() ? *it : curve.points.back()});
  }
  report.curve = std::move(curve);
  report.config = std::move(config);
  return report;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : curve.points)
    points.push_back({{"recall", p.recall}, {"precision", p.precision}, {"threshold", p.threshold},
                      {"tp", p.tp}, {"fp", p.fp}, {"fn", p.fn}});
  nlohmann::json ops = nlohmann::json::object();
  for (const auto& op : operating_points)
    ops[op.label] = {{"recall", op.point.recall}, {"precision", op.point.precision}, {"threshold", op.point.threshold},
                     {"tp", op.point.tp}, {"fp", op.point.fp}, {"fn", op.point.fn}};
  return {{"auc_20r", curve.auc_20r},
          {"auc_recall", curve.auc_recall},
          {"max_recall", curve.max_recall()},
          {"counts", ops},
          {"curve", points},
          {"config", config}};
}

std::string EvalReport::curve_csv() const {
  std::string out = "recall,precision,threshold\n";
  for (const auto& p : curve.points) out += fmt_double(p.recall) + "," + fmt_double(p.precision) + "," + fmt_double(p.threshold) + "\n";
  return out;
}

}  // namespace vpr
