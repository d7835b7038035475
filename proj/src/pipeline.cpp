#include "vpr/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "vpr/error.hpp"
#include "vpr/matrix_io.hpp"

namespace vpr {
namespace {

constexpr const char* kModule = "pipeline";

template <typename T>
T get_as(const nlohmann::json& value, std::string_view key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(kModule, "config key '" + std::string(key) + "' has the wrong type");
  }
}

}  // namespace

InputMode parse_input_mode(std::string_view name) {
  if (name == "images") return InputMode::images;
  if (name == "descriptors") return InputMode::descriptors;
  if (name == "distance-matrix" || name == "distmat") return InputMode::distance_matrix;
  throw ValidationError(kModule, "unknown input mode '" + std::string(name) + "'");
}

std::string_view input_mode_name(InputMode mode) {
  switch (mode) {
    case InputMode::images: return "images";
    case InputMode::descriptors: return "descriptors";
    case InputMode::distance_matrix: return "distance-matrix";
  }
  return "unknown";
}

PredictionSource parse_prediction_source(std::string_view name) {
  if (name == "consensus") return PredictionSource::consensus;
  if (name == "perfect") return PredictionSource::perfect;
  if (name == "none") return PredictionSource::none;
  throw ValidationError(kModule, "unknown prediction source '" + std::string(name) + "'");
}

std::string_view prediction_source_name(PredictionSource source) {
  switch (source) {
    case PredictionSource::consensus: return "consensus";
    case PredictionSource::perfect: return "perfect";
    case PredictionSource::none: return "none";
  }
  return "unknown";
}

void SystemParams::validate() const {
  if (!(w >= 0.0 && w <= 1.0)) throw ValidationError(kModule, "weight must lie in [0,1]");
  if (w == 1.0 && predictions != PredictionSource::none)
    throw ValidationError(kModule,
                          "weight 1 collapses every predicted match onto D_min, so no PR curve can be swept; use w < 1 "
                          "(e.g. 0.99)");
  if (seq_len < 1) throw ValidationError(kModule, "sequence length must be >= 1");
  if (!(auc_recall > 0.0 && auc_recall <= 1.0)) throw ValidationError(kModule, "AUC recall bound must lie in (0,1]");
  if (degrade) degrade->validate();
}

nlohmann::json SystemParams::to_json() const {
  nlohmann::json j{{"weight", w},
                   {"seq-len", seq_len},
                   {"dmin-mode", dmin_mode_name(dmin_mode)},
                   {"boundary", boundary_name(boundary)},
                   {"predictions", prediction_source_name(predictions)},
                   {"mask", mask},
                   {"auc-recall", auc_recall}};
  if (degrade) {
    j["flip-good-to-bad"] = degrade->flip_good_to_bad;
    j["flip-bad-to-good"] = degrade->flip_bad_to_good;
    j["degrade-seed"] = degrade->seed;
  }
  return j;
}

SystemOutput run_system(const DistanceMatrix& d, const GroundTruth& gt, const SystemParams& params,
                        nlohmann::json config_echo) {
  params.validate();
  if (gt.queries() != d.queries())
    throw ValidationError(kModule, "ground truth has " + std::to_string(gt.queries()) + " entries for " +
                                       std::to_string(d.queries()) + " queries");
  gt.validate(d.refs());

  SystemOutput out;
  out.consensus = consensus_predict(d, gradient_matrix(d));
  switch (params.predictions) {
    case PredictionSource::consensus:
      out.predictions = out.consensus.values;
      break;
    case PredictionSource::perfect:
      out.predictions = perfect_predictions(best_matches(d), gt);
      break;
    case PredictionSource::none:
      out.predictions.assign(d.queries(), 0);
      break;
  }
  if (params.degrade) out.predictions = degrade_predictions(out.predictions, *params.degrade);

  out.weighted = weight_matrix(d, out.predictions, params.w, params.dmin_mode);
  out.scores = sequence_scores(out.weighted, params.seq_len, params.boundary);
  out.matches = best_sequence_matches(out.scores);
  if (params.mask) {
    out.accepted = mask_matches(out.matches, out.predictions);
  } else {
    out.accepted.kept = out.matches;
  }
  if (out.accepted.kept.empty()) throw ValidationError(kModule, "prediction mask rejected every query; nothing to evaluate");

  auto curve = pr_curve(out.accepted.kept, out.accepted.abstentions, gt, ScoreDirection::min_is_best, params.auc_recall);
  if (config_echo.is_null() || config_echo.empty()) config_echo = params.to_json();
  out.report = make_report(std::move(curve), std::move(config_echo));
  return out;
}

double system_auc(const DistanceMatrix& d, const GroundTruth& gt, const SystemParams& params) {
  return run_system(d, gt, params).report.curve.auc_20r;
}

void PipelineConfig::validate() const {
  switch (input) {
    case InputMode::images:
    case InputMode::descriptors:
      if (refs.empty() || queries.empty()) throw ValidationError(kModule, "--refs and --queries are required");
      if (!distmat.empty()) throw ValidationError(kModule, "--distmat conflicts with --refs/--queries");
      break;
    case InputMode::distance_matrix:
      if (distmat.empty()) throw ValidationError(kModule, "--distmat is required");
      if (!refs.empty() || !queries.empty()) throw ValidationError(kModule, "--refs/--queries conflict with --distmat");
      break;
  }
  if (gt.empty()) throw ValidationError(kModule, "--gt is required");
  if (input == InputMode::images) sad.validate();
  system.validate();
}

Metric PipelineConfig::effective_metric() const {
  if (metric) return *metric;
  return input == InputMode::images ? Metric::euclidean : Metric::cosine;
}

nlohmann::json PipelineConfig::to_json() const {
  auto j = system.to_json();
  j["input"] = input_mode_name(input);
  if (!refs.empty()) j["refs"] = refs.string();
  if (!queries.empty()) j["queries"] = queries.string();
  if (!distmat.empty()) j["distmat"] = distmat.string();
  j["gt"] = gt.string();
  j["metric"] = metric_name(effective_metric());
  if (input == InputMode::images) {
    j["sad-width"] = sad.width;
    j["sad-height"] = sad.height;
    j["sad-patch-width"] = sad.patch_width;
    j["sad-patch-height"] = sad.patch_height;
  }
  j["tolerance"] = tolerance;
  j["seed"] = seed;
  return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError(kModule, "config file must hold a JSON object");
  PipelineConfig cfg;
  PredictorQualityConfig degrade;
  bool has_degrade = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "input") cfg.input = parse_input_mode(get_as<std::string>(value, key));
    else if (key == "refs") cfg.refs = get_as<std::string>(value, key);
    else if (key == "queries") cfg.queries = get_as<std::string>(value, key);
    else if (key == "distmat") cfg.distmat = get_as<std::string>(value, key);
    else if (key == "gt") cfg.gt = get_as<std::string>(value, key);
    else if (key == "metric") cfg.metric = parse_metric(get_as<std::string>(value, key));
    else if (key == "sad-width") cfg.sad.width = get_as<int>(value, key);
    else if (key == "sad-height") cfg.sad.height = get_as<int>(value, key);
    else if (key == "sad-patch-width") cfg.sad.patch_width = get_as<int>(value, key);
    else if (key == "sad-patch-height") cfg.sad.patch_height = get_as<int>(value, key);
    else if (key == "weight") cfg.system.w = get_as<double>(value, key);
    else if (key == "seq-len") cfg.system.seq_len = get_as<std::size_t>(value, key);
    else if (key == "dmin-mode") cfg.system.dmin_mode = parse_dmin_mode(get_as<std::string>(value, key));
    else if (key == "boundary") cfg.system.boundary = parse_boundary(get_as<std::string>(value, key));
    else if (key == "predictions") cfg.system.predictions = parse_prediction_source(get_as<std::string>(value, key));
    else if (key == "mask") cfg.system.mask = get_as<bool>(value, key);
    else if (key == "auc-recall") cfg.system.auc_recall = get_as<double>(value, key);
    else if (key == "flip-good-to-bad") { degrade.flip_good_to_bad = get_as<double>(value, key); has_degrade = true; }
    else if (key == "flip-bad-to-good") { degrade.flip_bad_to_good = get_as<double>(value, key); has_degrade = true; }
    else if (key == "degrade-seed") degrade.seed = get_as<std::uint64_t>(value, key);
    else if (key == "tolerance") cfg.tolerance = get_as<std::size_t>(value, key);
    else if (key == "report") cfg.report_json = get_as<std::string>(value, key);
    else if (key == "curve") cfg.curve_csv = get_as<std::string>(value, key);
    else if (key == "matches") cfg.matches_csv = get_as<std::string>(value, key);
    else if (key == "seed") cfg.seed = get_as<std::uint64_t>(value, key);
    else throw ValidationError(kModule, "unknown config key '" + key + "'");
  }
  if (has_degrade) cfg.system.degrade = degrade;
  return cfg;
}

DistanceMatrix load_distance_matrix(const PipelineConfig& cfg) {
  switch (cfg.input) {
    case InputMode::images:
      return distance_matrix(sad_descriptors_from_directory(cfg.refs, cfg.sad),
                             sad_descriptors_from_directory(cfg.queries, cfg.sad), cfg.effective_metric());
    case InputMode::descriptors:
      return distance_matrix(load_descriptors(cfg.refs), load_descriptors(cfg.queries), cfg.effective_metric());
    case InputMode::distance_matrix:
      return DistanceMatrix(load_matrix(cfg.distmat), cfg.effective_metric());
  }
  throw ValidationError(kModule, "unsupported input mode");
}

EvalReport run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const auto d = load_distance_matrix(cfg);
  const auto gt = load_ground_truth(cfg.gt, cfg.tolerance);
  auto out = run_system(d, gt, cfg.system, cfg.to_json());
  if (!cfg.report_json.empty()) write_file(cfg.report_json, out.report.to_json().dump(2) + "\n");
  if (!cfg.curve_csv.empty()) write_file(cfg.curve_csv, out.report.curve_csv());
  if (!cfg.matches_csv.empty()) write_file(cfg.matches_csv, matches_csv(out.matches));
  return std::move(out.report);
}

std::string matches_csv(std::span<const MatchCandidate> matches) {
  std::string out = "query,ref,score\n";
  char buf[32];
  for (const auto& m : matches) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), m.score);
    out += std::to_string(m.query) + "," + std::to_string(m.ref) + "," + std::string(buf, ptr) + "\n";
  }
  return out;
}

std::vector<MatchCandidate> parse_matches_csv(std::string_view text, std::string_view source) {
  auto nl = text.find('\n');
  const auto header = text.substr(0, nl);
  if (header.rfind("query,ref,score", 0) != 0)
    throw ValidationError(kModule, std::string(source) + ": expected header 'query,ref,score'");
  text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
  const auto m = parse_csv_matrix(text, source);
  if (m.cols() != 3) throw ValidationError(kModule, std::string(source) + ": expected 3 columns");
  std::vector<MatchCandidate> out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (m(r, 0) < 0 || m(r, 1) < 0 || m(r, 0) != std::floor(m(r, 0)) || m(r, 1) != std::floor(m(r, 1)))
      throw ValidationError(kModule, std::string(source) + ": row " + std::to_string(r) + " has a non-integer index");
    out.push_back({static_cast<std::size_t>(m(r, 0)), static_cast<std::size_t>(m(r, 1)), m(r, 2)});
  }
  return out;
}

}  // namespace vpr
