#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vpr/descriptors.hpp"
#include "vpr/eval.hpp"
#include "vpr/matching.hpp"
#include "vpr/predictor.hpp"
#include "vpr/seqmatch.hpp"
#include "vpr/synth.hpp"

namespace vpr {

enum class InputMode { images, descriptors, distance_matrix };

// Which predictions drive the weighting. `none` gives the unweighted baseline.
enum class PredictionSource { consensus, perfect, none };

InputMode parse_input_mode(std::string_view name);
std::string_view input_mode_name(InputMode mode);
PredictionSource parse_prediction_source(std::string_view name);
std::string_view prediction_source_name(PredictionSource source);

// Parameters of one evaluated system: predict, weight, sequence-match, score.
struct SystemParams {
  double w = kDefaultWeight;
  std::size_t seq_len = kDefaultSeqLen;
  DminMode dmin_mode = DminMode::global;
  SequenceBoundary boundary = SequenceBoundary::replicate;
  PredictionSource predictions = PredictionSource::consensus;
  std::optional<PredictorQualityConfig> degrade;
  // Drop queries predicted out of tolerance instead of only weighting them.
  bool mask = false;
  double auc_recall = kDefaultAucRecall;

  // PR curves need w < 1 whenever predictions are applied.
  void validate() const;
  nlohmann::json to_json() const;
};

struct SystemOutput {
  PredictionVector consensus;
  std::vector<std::uint8_t> predictions;  // bits actually used for weighting
  WeightedDistanceMatrix weighted;
  SequenceScoreMatrix scores;
  std::vector<SequenceMatch> matches;
  MaskedMatches accepted;
  EvalReport report;
};

SystemOutput run_system(const DistanceMatrix& d, const GroundTruth& gt, const SystemParams& params,
                        nlohmann::json config_echo = nlohmann::json::object());

// AUC of the system only.
double system_auc(const DistanceMatrix& d, const GroundTruth& gt, const SystemParams& params);

struct PipelineConfig {
  InputMode input = InputMode::descriptors;
  std::filesystem::path refs;     // image directory or descriptor file
  std::filesystem::path queries;  // image directory or descriptor file
  std::filesystem::path distmat;  // rows = references, columns = queries
  std::filesystem::path gt;
  std::optional<Metric> metric;   // default: euclidean for images, cosine for descriptors
  SadConfig sad;
  SystemParams system;
  std::size_t tolerance = kDefaultTolerance;
  std::filesystem::path report_json;
  std::filesystem::path curve_csv;
  std::filesystem::path matches_csv;
  std::uint64_t seed = 42;

  void validate() const;
  Metric effective_metric() const;
  nlohmann::json to_json() const;
  // Unknown keys are rejected; missing keys keep their defaults.
  static PipelineConfig from_json(const nlohmann::json& j);
};

DistanceMatrix load_distance_matrix(const PipelineConfig& cfg);

// Runs every stage, writes the configured outputs and returns the report.
EvalReport run_pipeline(const PipelineConfig& cfg);

// "query,ref,score" with header; shared by the CLI subcommands.
std::string matches_csv(std::span<const MatchCandidate> matches);
std::vector<MatchCandidate> parse_matches_csv(std::string_view text, std::string_view source = "<memory>");

}  // namespace vpr
