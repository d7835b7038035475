#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vpr/bench.hpp"
#include "vpr/descriptors.hpp"
#include "vpr/error.hpp"
#include "vpr/eval.hpp"
#include "vpr/matching.hpp"
#include "vpr/matrix_io.hpp"
#include "vpr/pipeline.hpp"
#include "vpr/predictor.hpp"
#include "vpr/seqmatch.hpp"
#include "vpr/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kModule = "cli";

std::vector<std::int64_t> to_int64(const std::vector<std::uint8_t>& bits) {
  return {bits.begin(), bits.end()};
}

std::vector<std::uint8_t> load_prediction_bits(const fs::path& path, std::size_t expected) {
  const auto raw = vpr::load_integer_column(path);
  if (raw.size() != expected)
    throw vpr::ValidationError(kModule, path.string() + ": " + std::to_string(raw.size()) + " predictions for " +
                                            std::to_string(expected) + " queries");
  std::vector<std::uint8_t> bits;
  bits.reserve(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (raw[j] != 0 && raw[j] != 1)
      throw vpr::ValidationError(kModule, path.string() + ": row " + std::to_string(j + 1) + " is not 0 or 1");
    bits.push_back(static_cast<std::uint8_t>(raw[j]));
  }
  return bits;
}

std::vector<vpr::MatchCandidate> load_matches(const fs::path& path) {
  return vpr::parse_matches_csv(vpr::read_file(path), path.string());
}

// ---- distmat ----

struct DistmatArgs {
  std::string input = "descriptors";
  std::string refs, queries, metric, out;
  vpr::SadConfig sad;
};

void add_sad_flags(CLI::App* sub, vpr::SadConfig& sad) {
  sub->add_option("--sad-width", sad.width, "SAD downsampled width")->capture_default_str();
  sub->add_option("--sad-height", sad.height, "SAD downsampled height")->capture_default_str();
  sub->add_option("--sad-patch-width", sad.patch_width, "SAD normalization patch width")->capture_default_str();
  sub->add_option("--sad-patch-height", sad.patch_height, "SAD normalization patch height")->capture_default_str();
}

void run_distmat(const DistmatArgs& a) {
  vpr::PipelineConfig cfg;
  cfg.input = vpr::parse_input_mode(a.input);
  if (cfg.input == vpr::InputMode::distance_matrix)
    throw vpr::ValidationError(kModule, "distmat needs images or descriptors as input");
  cfg.refs = a.refs;
  cfg.queries = a.queries;
  if (!a.metric.empty()) cfg.metric = vpr::parse_metric(a.metric);
  cfg.sad = a.sad;
  const auto d = vpr::load_distance_matrix(cfg);
  vpr::save_matrix(a.out, d.values());
  std::cout << "distance matrix " << d.refs() << "x" << d.queries() << " (" << vpr::metric_name(d.metric()) << ") -> "
            << a.out << "\n";
  if (const auto zeros = d.zero_vector_count(); zeros > 0)
    std::cerr << "warning: " << zeros << " zero-norm descriptors\n";
}

// ---- predict ----

struct PredictArgs {
  std::string distmat, out, details, gradient, gradient_matches;
  std::string kernel = "default";
};

vpr::SmoothingKernel parse_kernel(const std::string& name) {
  if (name == "default") return vpr::kDefaultKernel;
  if (name == "box") return vpr::kBoxKernel;
  throw vpr::ValidationError(kModule, "unknown kernel '" + name + "' (expected default or box)");
}

void run_predict(const PredictArgs& a) {
  const vpr::DistanceMatrix d(vpr::load_matrix(a.distmat), vpr::Metric::euclidean);
  const auto g = vpr::gradient_matrix(d, parse_kernel(a.kernel));
  const auto p = vpr::consensus_predict(d, g);
  vpr::save_integer_column(a.out, to_int64(p.values));
  if (!a.details.empty()) {
    std::string csv = "query,i_d0,i_g0,good\n";
    for (std::size_t j = 0; j < p.size(); ++j)
      csv += std::to_string(j) + "," + std::to_string(p.i_d0[j]) + "," + std::to_string(p.i_g0[j]) + "," +
             std::to_string(p.values[j]) + "\n";
    vpr::write_file(a.details, csv);
  }
  if (!a.gradient.empty()) vpr::save_matrix(a.gradient, g.values);
  if (!a.gradient_matches.empty()) {
    std::vector<vpr::MatchCandidate> ms;
    for (std::size_t j = 0; j < g.queries(); ++j) ms.push_back(vpr::gradient_only_match(g, j));
    vpr::write_file(a.gradient_matches, vpr::matches_csv(ms));
  }
  std::cout << p.accepted() << " of " << p.size() << " queries predicted in tolerance -> " << a.out << "\n";
}

// ---- seqmatch ----

struct SeqmatchArgs {
  std::string distmat, pred, gt, out, scores, weighted, abstentions;
  std::string predictions = "consensus";
  std::string dmin_mode = "global";
  std::string boundary = "replicate";
  double w = vpr::kDefaultWeight;
  std::size_t seq_len = vpr::kDefaultSeqLen;
  std::size_t tolerance = vpr::kDefaultTolerance;
  bool mask = false;
};

void run_seqmatch(const SeqmatchArgs& a) {
  const vpr::DistanceMatrix d(vpr::load_matrix(a.distmat), vpr::Metric::euclidean);
  std::vector<std::uint8_t> bits;
  if (!a.pred.empty()) {
    bits = load_prediction_bits(a.pred, d.queries());
  } else {
    switch (vpr::parse_prediction_source(a.predictions)) {
      case vpr::PredictionSource::consensus:
        bits = vpr::consensus_predict(d, vpr::gradient_matrix(d)).values;
        break;
      case vpr::PredictionSource::perfect: {
        if (a.gt.empty()) throw vpr::ValidationError(kModule, "--predictions perfect needs --gt");
        const auto gt = vpr::load_ground_truth(a.gt, a.tolerance);
        gt.validate(d.refs());
        bits = vpr::perfect_predictions(vpr::best_matches(d), gt);
        break;
      }
      case vpr::PredictionSource::none:
        bits.assign(d.queries(), 0);
        break;
    }
  }
  const auto wd = vpr::weight_matrix(d, bits, a.w, vpr::parse_dmin_mode(a.dmin_mode));
  const auto s = vpr::sequence_scores(wd, a.seq_len, vpr::parse_boundary(a.boundary));
  const auto matches = vpr::best_sequence_matches(s);
  if (a.mask) {
    const auto masked = vpr::mask_matches(matches, bits);
    vpr::write_file(a.out, vpr::matches_csv(masked.kept));
    if (!a.abstentions.empty()) vpr::write_file(a.abstentions, vpr::matches_csv(masked.abstentions));
    std::cout << masked.kept.size() << " matches kept, " << masked.abstentions.size() << " abstentions -> " << a.out
              << "\n";
  } else {
    vpr::write_file(a.out, vpr::matches_csv(matches));
    std::cout << matches.size() << " matches -> " << a.out << "\n";
  }
  if (!a.weighted.empty()) vpr::save_matrix(a.weighted, wd.values);
  if (!a.scores.empty()) vpr::save_matrix(a.scores, s.values);
}

// ---- eval ----

struct EvalArgs {
  std::string matches, abstentions, gt, json_out, csv_out;
  std::string direction = "min";
  std::size_t tolerance = vpr::kDefaultTolerance;
  double auc_recall = vpr::kDefaultAucRecall;
};

void print_summary(const vpr::EvalReport& r) {
  const auto& c = r.curve;
  std::printf("AUC@%gR %.6f  max recall %.6f  points %zu\n", c.auc_recall, c.auc_20r, c.max_recall(), c.points.size());
}

void run_eval(const EvalArgs& a) {
  const auto matches = load_matches(a.matches);
  std::vector<vpr::MatchCandidate> abst;
  if (!a.abstentions.empty()) abst = load_matches(a.abstentions);
  const auto gt = vpr::load_ground_truth(a.gt, a.tolerance);
  const auto dir = vpr::parse_direction(a.direction);
  auto curve = vpr::pr_curve(matches, abst, gt, dir, a.auc_recall);
  const json echo{{"matches", a.matches},
                  {"abstentions", a.abstentions},
                  {"gt", a.gt},
                  {"tolerance", a.tolerance},
                  {"direction", vpr::direction_name(dir)},
                  {"auc-recall", a.auc_recall}};
  const auto report = vpr::make_report(std::move(curve), echo);
  if (!a.json_out.empty()) vpr::write_file(a.json_out, report.to_json().dump(2) + "\n");
  if (!a.csv_out.empty()) vpr::write_file(a.csv_out, report.curve_csv());
  print_summary(report);
}

// ---- synth ----

struct SynthArgs {
  vpr::SynthConfig cfg;
  std::string out, format = "csv", metric;
};

void run_synth(const SynthArgs& a) {
  const auto fmt = vpr::parse_matrix_format(a.format);
  const std::string ext = fmt == vpr::MatrixFormat::csv ? ".csv" : ".bin";
  const auto t = vpr::generate_traverse(a.cfg);
  const fs::path dir = a.out;
  vpr::save_descriptors(dir / ("refs" + ext), t.refs, fmt);
  vpr::save_descriptors(dir / ("queries" + ext), t.queries, fmt);
  vpr::save_ground_truth(dir / "gt.csv", t.gt);
  vpr::save_integer_column(dir / "aliased.csv", to_int64(t.aliased));
  if (!a.metric.empty()) {
    const auto d = vpr::distance_matrix(t.refs, t.queries, vpr::parse_metric(a.metric));
    vpr::save_matrix(dir / ("distmat" + ext), d.values(), fmt);
  }
  std::cout << t.refs.size() << " refs, " << t.queries.size() << " queries -> " << dir.string() << "\n";
}

// ---- bench ----

struct BenchArgs {
  vpr::BenchConfig cfg;
  bool parallel = false;
  std::string json_out;
};

void run_bench(BenchArgs a) {
  if (a.parallel && a.cfg.threads == 1) a.cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto r = vpr::bench(a.cfg);
  std::printf("%8s %12s %12s %12s %12s %12s\n", "n_refs", "pred_mean", "seq_mean", "comb_mean", "comb_median",
              "comb_p99");
  for (const auto& p : r.points)
    std::printf("%8zu %12.4f %12.4f %12.4f %12.4f %12.4f\n", p.n_refs, p.prediction.mean_ms, p.sequence.mean_ms,
                p.combined.mean_ms, p.combined.median_ms, p.combined.p99_ms);
  std::printf("fit: %.6g ms/ref + %.4f ms, R^2 %.4f (ms per query)\n", r.combined_fit.slope, r.combined_fit.intercept,
              r.combined_fit.r_squared);
  if (!a.json_out.empty()) vpr::write_file(a.json_out, r.to_json().dump(2) + "\n");
}

// ---- run ----

// Each flag of `run` mirrors one config-file key. Flags given on the command
// line are written over the file's values before the config is parsed.
struct RunArgs {
  std::string config;
  bool print_config = false;
  std::vector<std::function<void(json&)>> overrides;
  // storage for the mirrored flags
  std::string s_input, s_refs, s_queries, s_distmat, s_gt, s_metric, s_dmin, s_boundary, s_pred, s_report, s_curve,
      s_matches;
  int sad_w = 0, sad_h = 0, sad_pw = 0, sad_ph = 0;
  double weight = 0, auc_recall = 0, flip_gb = 0, flip_bg = 0;
  std::size_t seq_len = 0, tolerance = 0;
  std::uint64_t degrade_seed = 0, seed = 0;
  bool mask = false;
};

template <typename T>
void mirror(CLI::App* sub, RunArgs& a, const std::string& key, T& storage, const std::string& help) {
  auto* opt = sub->add_option("--" + key, storage, help);
  a.overrides.push_back([opt, key, &storage](json& j) {
    if (opt->count() > 0) j[key] = storage;
  });
}

void add_run_flags(CLI::App* sub, RunArgs& a) {
  sub->add_option("--config", a.config, "JSON config; keys mirror the flags below without the leading dashes");
  sub->add_flag("--print-config", a.print_config, "print the merged config and exit");
  mirror(sub, a, "input", a.s_input, "images | descriptors | distance-matrix");
  mirror(sub, a, "refs", a.s_refs, "reference image directory or descriptor file");
  mirror(sub, a, "queries", a.s_queries, "query image directory or descriptor file");
  mirror(sub, a, "distmat", a.s_distmat, "distance matrix file (rows = references)");
  mirror(sub, a, "gt", a.s_gt, "ground-truth reference index per query");
  mirror(sub, a, "metric", a.s_metric, "euclidean | cosine | sad");
  mirror(sub, a, "sad-width", a.sad_w, "SAD downsampled width");
  mirror(sub, a, "sad-height", a.sad_h, "SAD downsampled height");
  mirror(sub, a, "sad-patch-width", a.sad_pw, "SAD patch width");
  mirror(sub, a, "sad-patch-height", a.sad_ph, "SAD patch height");
  mirror(sub, a, "weight", a.weight, "weighting factor w in [0,1] (default 0.99)");
  mirror(sub, a, "seq-len", a.seq_len, "sequence length L (default 2)");
  mirror(sub, a, "dmin-mode", a.s_dmin, "global | running");
  mirror(sub, a, "boundary", a.s_boundary, "replicate | zero");
  mirror(sub, a, "predictions", a.s_pred, "consensus | perfect | none");
  mirror(sub, a, "mask", a.mask, "discard queries predicted out of tolerance");
  mirror(sub, a, "auc-recall", a.auc_recall, "recall bound of the AUC (default 0.2)");
  mirror(sub, a, "flip-good-to-bad", a.flip_gb, "degrade predictions: P(1 -> 0)");
  mirror(sub, a, "flip-bad-to-good", a.flip_bg, "degrade predictions: P(0 -> 1)");
  mirror(sub, a, "degrade-seed", a.degrade_seed, "seed of the degradation flips");
  mirror(sub, a, "tolerance", a.tolerance, "ground-truth tolerance in frames (default 1)");
  mirror(sub, a, "report", a.s_report, "report JSON output");
  mirror(sub, a, "curve", a.s_curve, "PR curve CSV output");
  mirror(sub, a, "matches", a.s_matches, "matches CSV output");
  mirror(sub, a, "seed", a.seed, "seed recorded with the run");
}

void run_run(const RunArgs& a) {
  json j = json::object();
  if (!a.config.empty()) {
    const auto text = vpr::read_file(a.config);
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw vpr::ValidationError(kModule, a.config + ": " + e.what());
    }
  }
  for (const auto& apply : a.overrides) apply(j);
  const auto cfg = vpr::PipelineConfig::from_json(j);
  if (a.print_config) {
    std::cout << cfg.to_json().dump(2) << "\n";
    return;
  }
  const auto report = vpr::run_pipeline(cfg);
  print_summary(report);
  if (cfg.report_json.empty()) std::cout << report.to_json().dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted sequence matching for visual place recognition"};
  app.require_subcommand(1);

  DistmatArgs dm;
  auto* s_dm = app.add_subcommand("distmat", "compute a distance matrix from images or descriptors");
  s_dm->add_option("--input", dm.input, "images | descriptors")->capture_default_str();
  s_dm->add_option("--refs", dm.refs, "reference image directory or descriptor file")->required();
  s_dm->add_option("--queries", dm.queries, "query image directory or descriptor file")->required();
  s_dm->add_option("--metric", dm.metric, "euclidean | cosine | sad (default: euclidean for images, cosine otherwise)");
  add_sad_flags(s_dm, dm.sad);
  s_dm->add_option("--out", dm.out, "output matrix (.csv, or .bin/.vprd for binary)")->required();

  PredictArgs pr;
  auto* s_pr = app.add_subcommand("predict", "consensus prediction of in-tolerance queries");
  s_pr->add_option("--distmat", pr.distmat, "distance matrix")->required();
  s_pr->add_option("--out", pr.out, "prediction column, one 0/1 per query")->required();
  s_pr->add_option("--details", pr.details, "CSV of query, distance argmin, gradient argmax, prediction");
  s_pr->add_option("--gradient", pr.gradient, "smoothed gradient matrix output");
  s_pr->add_option("--gradient-matches", pr.gradient_matches, "gradient-only matches CSV");
  s_pr->add_option("--kernel", pr.kernel, "default | box")->capture_default_str();

  SeqmatchArgs sq;
  auto* s_sq = app.add_subcommand("seqmatch", "weighted sequence matching");
  s_sq->add_option("--distmat", sq.distmat, "distance matrix")->required();
  s_sq->add_option("--pred", sq.pred, "prediction column from `predict`; overrides --predictions");
  s_sq->add_option("--predictions", sq.predictions, "consensus | perfect | none")->capture_default_str();
  s_sq->add_option("--gt", sq.gt, "ground truth, needed by --predictions perfect");
  s_sq->add_option("--tolerance", sq.tolerance, "ground-truth tolerance in frames")->capture_default_str();
  s_sq->add_option("--weight", sq.w, "weighting factor w in [0,1]")->capture_default_str();
  s_sq->add_option("--seq-len", sq.seq_len, "sequence length L")->capture_default_str();
  s_sq->add_option("--dmin-mode", sq.dmin_mode, "global | running")->capture_default_str();
  s_sq->add_option("--boundary", sq.boundary, "replicate | zero")->capture_default_str();
  s_sq->add_flag("--mask", sq.mask, "discard queries predicted out of tolerance");
  s_sq->add_option("--abstentions", sq.abstentions, "CSV of discarded matches (with --mask)");
  s_sq->add_option("--out", sq.out, "matches CSV")->required();
  s_sq->add_option("--weighted", sq.weighted, "weighted distance matrix output");
  s_sq->add_option("--scores", sq.scores, "sequence score matrix output");

  EvalArgs ev;
  auto* s_ev = app.add_subcommand("eval", "precision-recall curve and AUC of scored matches");
  s_ev->add_option("--matches", ev.matches, "matches CSV (query,ref,score)")->required();
  s_ev->add_option("--abstentions", ev.abstentions, "discarded matches, counted as misses when in tolerance");
  s_ev->add_option("--gt", ev.gt, "ground truth")->required();
  s_ev->add_option("--tolerance", ev.tolerance, "tolerance in frames")->capture_default_str();
  s_ev->add_option("--auc-recall", ev.auc_recall, "recall bound of the AUC")->capture_default_str();
  s_ev->add_option("--direction", ev.direction, "min | max: which score end is best")->capture_default_str();
  s_ev->add_option("--json", ev.json_out, "report JSON output");
  s_ev->add_option("--csv", ev.csv_out, "PR curve CSV output");

  SynthArgs sy;
  auto* s_sy = app.add_subcommand("synth", "generate a synthetic traverse with ground truth");
  s_sy->add_option("--n", sy.cfg.n_refs, "reference frames")->capture_default_str();
  s_sy->add_option("--queries", sy.cfg.n_queries, "query frames (0: same as --n)")->capture_default_str();
  s_sy->add_option("--dim", sy.cfg.descriptor_dim, "descriptor dimension")->capture_default_str();
  s_sy->add_option("--sigma", sy.cfg.noise_sigma, "query noise std")->capture_default_str();
  s_sy->add_option("--alias", sy.cfg.alias_rate, "fraction of aliased queries")->capture_default_str();
  s_sy->add_option("--alias-strength", sy.cfg.alias_strength, "pull of an aliased query toward a distant place")
      ->capture_default_str();
  s_sy->add_option("--step", sy.cfg.step_sigma, "reference random-walk step std")->capture_default_str();
  s_sy->add_option("--drift", sy.cfg.drift, "maximum ground-truth offset in frames")->capture_default_str();
  s_sy->add_option("--seed", sy.cfg.seed, "random seed")->capture_default_str();
  s_sy->add_option("--format", sy.format, "csv | bin")->capture_default_str();
  s_sy->add_option("--distmat-metric", sy.metric, "also write distmat with this metric");
  s_sy->add_option("--out", sy.out, "output directory")->required();

  BenchArgs be;
  auto* s_be = app.add_subcommand("bench", "per-query latency of prediction and weighted sequence matching");
  s_be->add_option("--n", be.cfg.n_refs, "reference set sizes")->capture_default_str()->delimiter(',');
  s_be->add_option("--queries", be.cfg.queries, "queries per repetition")->capture_default_str();
  s_be->add_option("--reps", be.cfg.reps, "repetitions (>= 3)")->capture_default_str();
  s_be->add_option("--seq-len", be.cfg.seq_len, "sequence length L")->capture_default_str();
  s_be->add_option("--weight", be.cfg.w, "weighting factor w")->capture_default_str();
  s_be->add_option("--dim", be.cfg.descriptor_dim, "descriptor dimension")->capture_default_str();
  s_be->add_option("--seed", be.cfg.seed, "random seed")->capture_default_str();
  s_be->add_option("--threads", be.cfg.threads, "reference sizes measured concurrently")->capture_default_str();
  s_be->add_flag("--parallel", be.parallel, "same as --threads <hardware threads>");
  s_be->add_option("--json", be.json_out, "report JSON output");

  RunArgs rn;
  auto* s_rn = app.add_subcommand("run", "end-to-end pipeline; flags override the config file");
  add_run_flags(s_rn, rn);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*s_dm) run_distmat(dm);
    else if (*s_pr) run_predict(pr);
    else if (*s_sq) run_seqmatch(sq);
    else if (*s_ev) run_eval(ev);
    else if (*s_sy) run_synth(sy);
    else if (*s_be) run_bench(be);
    else if (*s_rn) run_run(rn);
  } catch (const vpr::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const vpr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
