#include "vpr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

#include "vpr/error.hpp"
#include "vpr/matching.hpp"
#include "vpr/predictor.hpp"
#include "vpr/seqmatch.hpp"
#include "vpr/synth.hpp"

namespace vpr {
namespace {

constexpr const char* kModule = "bench";
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

nlohmann::json stats_json(const LatencyStats& s) {
  return {{"mean_ms", s.mean_ms}, {"median_ms", s.median_ms}, {"p99_ms", s.p99_ms}};
}

}  // namespace

void BenchConfig::validate() const {
  if (reps < 3) throw ValidationError(kModule, "reps must be at least 3");
  if (n_refs.empty()) throw ValidationError(kModule, "no reference sizes to benchmark");
  for (auto n : n_refs)
    if (n < std::max<std::size_t>(2, seq_len)) throw ValidationError(kModule, "reference size " + std::to_string(n) + " is too small");
  if (queries < 1) throw ValidationError(kModule, "queries must be >= 1");
  if (seq_len < 1) throw ValidationError(kModule, "sequence length must be >= 1");
  if (!(w >= 0.0 && w <= 1.0)) throw ValidationError(kModule, "weight must lie in [0,1]");
  if (threads < 1) throw ValidationError(kModule, "threads must be >= 1");
}

LatencyStats summarize(std::vector<double> samples) {
  if (samples.empty()) return {};
  std::sort(samples.begin(), samples.end());
  LatencyStats s;
  s.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  const auto mid = samples.size() / 2;
  s.median_ms = samples.size() % 2 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(samples.size())));
  s.p99_ms = samples[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError(kModule, "linear fit needs at least 2 paired samples");
  const double k = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return fit;
}

namespace {

BenchPoint bench_one(const BenchConfig& cfg, std::size_t n) {
  SynthConfig synth;
  synth.n_refs = n;
  synth.n_queries = cfg.queries;
  synth.descriptor_dim = cfg.descriptor_dim;
  synth.seed = cfg.seed;
  const auto traverse = generate_traverse(synth);
  const auto d = distance_matrix(traverse.refs, traverse.queries, Metric::euclidean);

  std::vector<double> pred_ms, seq_ms, total_ms;
  pred_ms.reserve(cfg.reps * cfg.queries);
  seq_ms.reserve(cfg.reps * cfg.queries);
  total_ms.reserve(cfg.reps * cfg.queries);
  BenchPoint point;
  point.n_refs = n;

  for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
    StreamingPredictor predictor;
    StreamingSequenceMatcher matcher({cfg.w, cfg.seq_len, DminMode::running, SequenceBoundary::replicate, std::nullopt});
    std::uint64_t checksum = 0;
    for (std::size_t j = 0; j < d.queries(); ++j) {
      const auto column = d.column(j);
      const auto t0 = Clock::now();
      const auto step = predictor.push(column);
      const auto t1 = Clock::now();
      const auto match = matcher.push(column, step.good);
      const auto t2 = Clock::now();
      pred_ms.push_back(elapsed_ms(t0, t1));
      seq_ms.push_back(elapsed_ms(t1, t2));
      total_ms.push_back(elapsed_ms(t0, t2));
      checksum += match.ref;
    }
    point.rep_checksums.push_back(checksum);
    point.checksum += checksum;
  }
  point.prediction = summarize(std::move(pred_ms));
  point.sequence = summarize(std::move(seq_ms));
  point.combined = summarize(std::move(total_ms));
  return point;
}

}  // namespace

BenchReport bench(const BenchConfig& cfg) {
  cfg.validate();
  BenchReport report;
  report.config = cfg;
  report.points.resize(cfg.n_refs.size());

  if (cfg.threads == 1) {
    for (std::size_t k = 0; k < cfg.n_refs.size(); ++k) report.points[k] = bench_one(cfg, cfg.n_refs[k]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(cfg.n_refs.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(cfg.threads, cfg.n_refs.size()); ++t)
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < cfg.n_refs.size();) {
          try {
            report.points[k] = bench_one(cfg, cfg.n_refs[k]);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
    pool.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<double> xs, ys;
  for (const auto& p : report.points) {
    xs.push_back(static_cast<double>(p.n_refs));
    ys.push_back(p.combined.mean_ms);
  }
  if (xs.size() >= 2) report.combined_fit = fit_line(xs, ys);
  return report;
}

nlohmann::json BenchReport::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points)
    pts.push_back({{"n_refs", p.n_refs},
                   {"prediction", stats_json(p.prediction)},
                   {"weighted_sequence", stats_json(p.sequence)},
                   {"combined", stats_json(p.combined)},
                   {"checksum", p.checksum}});
  return {{"queries", config.queries},
          {"reps", config.reps},
          {"seq_len", config.seq_len},
          {"weight", config.w},
          {"seed", config.seed},
          {"threads", config.threads},
          {"points", pts},
          {"linear_fit", {{"slope_ms_per_ref", combined_fit.slope},
                          {"intercept_ms", combined_fit.intercept},
                          {"r_squared", combined_fit.r_squared}}}};
}

}  // namespace vpr
