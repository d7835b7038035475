// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures (capped), 0 when everything passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "vpr/bench.hpp"
#include "vpr/eval.hpp"
#include "vpr/matching.hpp"
#include "vpr/pipeline.hpp"
#include "vpr/predictor.hpp"
#include "vpr/seqmatch.hpp"
#include "vpr/synth.hpp"

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  std::string name;
  double time_limit_s;  // 0: none
  std::function<Outcome()> run;
};

Eigen::MatrixXd to_eigen(const oracle::Matrix& m) {
  Eigen::MatrixXd out(m.size(), m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[0].size(); ++j) out(i, j) = m[i][j];
  return out;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

vpr::DistanceMatrix traverse_distances(const vpr::Traverse& t) {
  return vpr::distance_matrix(t.refs, t.queries, vpr::Metric::euclidean);
}

Outcome gradient_oracle() {
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> d(2 + gen() % 199);
    for (auto& v : d) v = u(gen);
    const auto got = vpr::gradient_vector(d);
    const auto want = oracle::gradient(d);
    for (std::size_t i = 0; i < d.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  return {worst <= 1e-12, fmt("max |error| %.3g over 1000 vectors", worst)};
}

Outcome sequence_oracle() {
  std::mt19937_64 gen(102);
  std::size_t mismatches = 0, checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = oracle::random_matrix(20, 20, gen, 0.0, 3.0);
    const auto e = to_eigen(m);
    for (std::size_t L : {1, 2, 3, 5, 9}) {
      for (auto boundary : {vpr::SequenceBoundary::replicate, vpr::SequenceBoundary::zero}) {
        const auto s = vpr::sequence_scores(e, L, boundary);
        for (std::size_t i = 0; i < 20; ++i)
          for (std::size_t j = 0; j < 20; ++j) {
            const double want = boundary == vpr::SequenceBoundary::replicate ? oracle::diagonal_sum(m, i, j, L)
                                                                             : oracle::diagonal_sum_zero(m, i, j, L);
            ++checked;
            if (s.values(i, j) != want) ++mismatches;
          }
      }
    }
  }
  return {mismatches == 0, fmt("%zu of %zu entries differ (both boundaries)", mismatches, checked)};
}

Outcome weighting_algebra() {
  std::mt19937_64 gen(103);
  const auto m = to_eigen(oracle::random_matrix(30, 25, gen, 0.05, 4.0));
  const vpr::DistanceMatrix d(m, vpr::Metric::euclidean);
  const std::vector<std::uint8_t> all(25, 1);
  const double dmin = m.minCoeff();

  const auto w0 = vpr::weight_matrix(d, all, 0.0);
  const bool unchanged = w0.values == m;

  const auto w1 = vpr::weight_matrix(d, all, 1.0);
  bool exact = true;
  for (std::size_t j = 0; j < 25; ++j) {
    const auto i0 = vpr::argmin(d.column(j));
    if (w1.values(static_cast<Eigen::Index>(i0), static_cast<Eigen::Index>(j)) != dmin) exact = false;
  }
  const double worked = vpr::weighted_minimum(0.5, 0.1, 0.99);
  const bool case_ok = std::abs(worked - 0.104) <= 1e-12;
  return {unchanged && exact && case_ok,
          fmt("w=0 unchanged: %s; w=1 gives D_min exactly: %s; (0.5, 0.1, 0.99) -> %.15g", unchanged ? "yes" : "no",
              exact ? "yes" : "no", worked)};
}

Outcome self_similarity() {
  std::size_t instances = 0, bad_recall = 0, bad_pred = 0;
  for (std::size_t n : {50, 100, 300}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      vpr::SynthConfig cfg;
      cfg.n_refs = n;
      cfg.seed = seed;
      const auto t = vpr::generate_traverse(cfg);
      const auto d = vpr::distance_matrix(t.refs, t.refs, vpr::Metric::euclidean);
      vpr::GroundTruth gt;
      for (std::size_t j = 0; j < n; ++j) gt.gt_ref.push_back(j);
      const auto matches = vpr::best_matches(d);
      const auto curve = vpr::pr_curve(matches, {}, gt, vpr::ScoreDirection::min_is_best);
      if (curve.max_recall() != 1.0) ++bad_recall;
      const auto p = vpr::consensus_predict(d, vpr::gradient_matrix(d));
      for (std::size_t j = 2; j < n; ++j) bad_pred += p.values[j] != 1;
      ++instances;
    }
  }
  return {bad_recall == 0 && bad_pred == 0,
          fmt("%zu instances (n = 50, 100, 300): %zu below full recall, %zu queries j>=2 predicted 0", instances,
              bad_recall, bad_pred)};
}

Outcome perfect_bound() {
  std::size_t worse = 0, compared = 0;
  double min_gain = 1.0, mean_gain = 0.0;
  for (double alias : {0.1, 0.3}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      vpr::SynthConfig cfg;
      cfg.n_refs = 300;
      cfg.alias_rate = alias;
      cfg.noise_sigma = 0.6;
      cfg.seed = 1000 + seed;
      const auto t = vpr::generate_traverse(cfg);
      const auto d = traverse_distances(t);
      for (std::size_t L : {2, 3}) {
        vpr::SystemParams base;
        base.seq_len = L;
        base.predictions = vpr::PredictionSource::none;
        auto weighted = base;
        weighted.predictions = vpr::PredictionSource::perfect;
        weighted.w = 0.99;
        const double a0 = vpr::system_auc(d, t.gt, base);
        const double a1 = vpr::system_auc(d, t.gt, weighted);
        worse += a1 < a0;
        min_gain = std::min(min_gain, a1 - a0);
        mean_gain += a1 - a0;
        ++compared;
      }
    }
  }
  mean_gain /= static_cast<double>(compared);
  return {worse == 0, fmt("%zu of %zu comparisons below baseline; AUC gain min %+.4f mean %+.4f", worse, compared,
                          min_gain, mean_gain)};
}

std::vector<double> sweep(const vpr::DistanceMatrix& d, const vpr::GroundTruth& gt, vpr::SystemParams p) {
  std::vector<double> out;
  for (double w : {0.0, 0.25, 0.5, 0.75, 0.99}) {
    p.w = w;
    out.push_back(vpr::system_auc(d, gt, p));
  }
  return out;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (auto x : v) s += (s.empty() ? "" : " ") + fmt("%.4f", x);
  return s;
}

Outcome crossover() {
  constexpr double kBand = 0.02;
  // Degraded predictor: bits start from ground truth, then 80% of each kind flip.
  vpr::SynthConfig hard;
  hard.n_refs = 400;
  hard.alias_rate = 0.3;
  hard.noise_sigma = 0.6;
  hard.seed = 2024;
  const auto th = vpr::generate_traverse(hard);
  const auto dh = traverse_distances(th);
  vpr::SystemParams degraded;
  degraded.predictions = vpr::PredictionSource::perfect;
  degraded.degrade = vpr::PredictorQualityConfig{0.8, 0.8, 7};
  const auto down = sweep(dh, th.gt, degraded);

  // High-quality predictor: consensus output on an easy traverse.
  vpr::SynthConfig easy;
  easy.n_refs = 400;
  easy.alias_rate = 0.1;
  easy.noise_sigma = 0.5;
  easy.seed = 2024;
  const auto te = vpr::generate_traverse(easy);
  const auto de = traverse_distances(te);
  vpr::SystemParams good;
  good.predictions = vpr::PredictionSource::consensus;
  const auto up = sweep(de, te.gt, good);

  bool ok = true;
  for (std::size_t k = 1; k < down.size(); ++k) ok &= down[k] <= down[k - 1] + kBand;
  for (std::size_t k = 1; k < up.size(); ++k) ok &= up[k] >= up[k - 1] - kBand;
  return {ok, "w = 0..0.99: degraded [" + list(down) + "], consensus [" + list(up) + "]"};
}

Outcome pr_oracle() {
  std::mt19937_64 gen(107);
  std::size_t mismatched = 0;
  const std::size_t trials = 40;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t n_refs = 60, n_q = 50;
    vpr::GroundTruth gt;
    std::vector<vpr::MatchCandidate> kept, abst;
    std::vector<oracle::Scored> scored;
    std::size_t masked_in_tol = 0;
    const bool min_best = trial % 2 == 0;
    for (std::size_t q = 0; q < n_q; ++q) {
      gt.gt_ref.push_back(gen() % n_refs);
      const std::size_t ref = gen() % 3 == 0 ? gen() % n_refs : std::min<std::size_t>(gt.gt_ref[q] + gen() % 3, n_refs - 1);
      // Coarse scores so that ties occur.
      const double score = static_cast<double>(gen() % 20) / 4.0;
      const vpr::MatchCandidate c{q, ref, score};
      const bool in_tol = gt.in_tolerance(q, ref);
      if (gen() % 5 == 0) {
        abst.push_back(c);
        masked_in_tol += in_tol;
      } else {
        kept.push_back(c);
        scored.push_back({q, in_tol, score});
      }
    }
    const auto dir = min_best ? vpr::ScoreDirection::min_is_best : vpr::ScoreDirection::max_is_best;
    const auto got = vpr::pr_curve(kept, abst, gt, dir);
    const auto want = oracle::brute_force_pr(scored, masked_in_tol, min_best);
    bool same = got.points.size() == want.size();
    for (std::size_t k = 0; same && k < want.size(); ++k) {
      const auto& a = got.points[k];
      const auto& b = want[k];
      same = a.threshold == b.threshold && a.tp == b.tp && a.fp == b.fp && a.fn == b.fn && a.recall == b.recall &&
             a.precision == b.precision;
    }
    mismatched += !same;
  }
  return {mismatched == 0, fmt("%zu of %zu instances (50 queries each) differ from brute force", mismatched, trials)};
}

Outcome auc_arithmetic() {
  std::vector<vpr::PRPoint> pts(3);
  pts[0].recall = 0.0, pts[0].precision = 1.0;
  pts[1].recall = 0.1, pts[1].precision = 1.0;
  pts[2].recall = 0.2, pts[2].precision = 0.5;
  const double a = vpr::auc_at_recall(pts, 0.2);
  return {std::abs(a - 0.875) <= 1e-12, fmt("auc_20r = %.15g", a)};
}

Outcome latency() {
  vpr::BenchConfig cfg;
  const auto r = vpr::bench(cfg);
  const auto& last = r.points.back();
  const bool fast = last.n_refs == 1800 && last.combined.mean_ms < 20.0;
  const bool linear = r.combined_fit.r_squared >= 0.9;
  std::string per_n;
  for (const auto& p : r.points) per_n += fmt(" %zu:%.4f", p.n_refs, p.combined.mean_ms);
  return {fast && linear, fmt("combined mean ms per query%s; R^2 %.4f", per_n.c_str(), r.combined_fit.r_squared)};
}

Outcome streaming() {
  std::size_t pred_diff = 0, match_diff = 0, score_diff = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    vpr::SynthConfig cfg;
    cfg.n_refs = 150;
    cfg.n_queries = 120;
    cfg.alias_rate = 0.2;
    cfg.seed = seed;
    const auto t = vpr::generate_traverse(cfg);
    const auto d = traverse_distances(t);
    const auto batch = vpr::consensus_predict(d, vpr::gradient_matrix(d));
    const std::size_t L = 1 + seed % 4;
    const auto wd = vpr::weight_matrix(d, batch, 0.99, vpr::DminMode::running);
    const auto s = vpr::sequence_scores(wd, L);
    const auto matches = vpr::best_sequence_matches(s);

    vpr::StreamingPredictor predictor;
    vpr::StreamingSequenceMatcher matcher({0.99, L, vpr::DminMode::running, vpr::SequenceBoundary::replicate, {}});
    for (std::size_t j = 0; j < d.queries(); ++j) {
      const auto step = predictor.push(d.column(j));
      pred_diff += step.good != batch.values[j] || step.i_d0 != batch.i_d0[j] || step.i_g0 != batch.i_g0[j];
      const auto m = matcher.push(d.column(j), step.good);
      match_diff += !(m == matches[j]);
      for (std::size_t i = 0; i < d.refs(); ++i)
        score_diff += matcher.last_scores()[i] != s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return {pred_diff + match_diff + score_diff == 0,
          fmt("differences: %zu predictions, %zu matches, %zu scores", pred_diff, match_diff, score_diff)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"gradient oracle", 1.0, gradient_oracle},
      {"sequence-score oracle", 5.0, sequence_oracle},
      {"weighting algebra", 0.0, weighting_algebra},
      {"self-similarity sanity", 0.0, self_similarity},
      {"perfect-prediction bound", 30.0, perfect_bound},
      {"predictor-quality crossover", 0.0, crossover},
      {"PR-curve oracle", 0.0, pr_oracle},
      {"AUC arithmetic", 0.0, auc_arithmetic},
      {"latency and linear scaling", 120.0, latency},
      {"streaming equivalence", 0.0, streaming},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (c.time_limit_s > 0.0 && secs >= c.time_limit_s) {
      o.pass = false;
      o.detail += fmt("; runtime over %.0f s", c.time_limit_s);
    }
    failures += !o.pass;
    std::printf("%s  %-30s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }

  // User-supplied real traverse: VPR_DATASET_DIR holding refs.csv, queries.csv, gt.csv.
  if (const char* dir = std::getenv("VPR_DATASET_DIR")) {
    const std::filesystem::path root(dir);
    vpr::PipelineConfig cfg;
    cfg.refs = root / "refs.csv";
    cfg.queries = root / "queries.csv";
    cfg.gt = root / "gt.csv";
    cfg.system.predictions = vpr::PredictionSource::none;
    try {
      const double base = vpr::run_pipeline(cfg).curve.auc_20r;
      cfg.system.predictions = vpr::PredictionSource::consensus;
      const double weighted = vpr::run_pipeline(cfg).curve.auc_20r;
      const bool ok = weighted >= base;
      failures += !ok;
      std::printf("%s  %-30s baseline %.4f, weighted %.4f\n", ok ? "PASS" : "FAIL", "dataset harness", base, weighted);
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL  %-30s threw: %s\n", "dataset harness", e.what());
    }
  } else {
    std::printf("SKIP  %-30s set VPR_DATASET_DIR to a directory with refs.csv, queries.csv, gt.csv\n",
                "dataset harness");
  }

  std::printf("%d failure(s)\n", failures);
  return std::min(failures, 100);
}
