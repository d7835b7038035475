#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vpr/error.hpp"
#include "vpr/predictor.hpp"
#include "vpr/synth.hpp"

using namespace vpr;

namespace {

Eigen::MatrixXd to_eigen(const oracle::Matrix& m) {
  Eigen::MatrixXd out(m.size(), m.front().size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) out(i, j) = m[i][j];
  return out;
}

}  // namespace

TEST_CASE("gradient_vector: worked examples") {
  CHECK(gradient_vector(std::vector<double>{1, 0, 1}) == std::vector<double>{-1, 1, -1});
  CHECK(gradient_vector(std::vector<double>{3, 3, 3, 3}) == std::vector<double>{0, 0, 0, 0});
  CHECK(gradient_vector(std::vector<double>{0, 1, 2, 4}) == std::vector<double>{1, 0, 0.5, -2});
  CHECK(gradient_vector(std::vector<double>{2, 5}) == std::vector<double>{3, -3});
  CHECK_THROWS_AS(gradient_vector(std::vector<double>{1}), ValidationError);
}

TEST_CASE("property: gradient_vector matches the direct formula") {
  std::mt19937_64 gen(21);
  std::uniform_int_distribution<std::size_t> len(2, 60);
  for (int trial = 0; trial < 200; ++trial) {
    const auto col = oracle::random_matrix(1, len(gen), gen, 0.0, 5.0).front();
    const auto g = gradient_vector(col);
    const auto expected = oracle::gradient(col);
    for (std::size_t i = 0; i < col.size(); ++i) CHECK(std::abs(g[i] - expected[i]) <= 1e-12);
  }
}

TEST_CASE("smooth_gradient: constants are preserved") {
  const Eigen::MatrixXd raw = Eigen::MatrixXd::Constant(7, 5, 2.5);
  const auto s = smooth_gradient(raw);
  CHECK((s.array() - 2.5).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("smooth_gradient: single column uses the mean-padded window") {
  const oracle::Matrix raw{{1.0}, {4.0}, {-2.0}, {0.5}};
  const auto s = smooth_gradient(to_eigen(raw), kBoxKernel);
  for (std::size_t i = 0; i < raw.size(); ++i) CHECK(std::abs(s(i, 0) - oracle::smoothed(raw, i, 0)) <= 1e-12);
  // Row 0: own window {1, 1, 4} (edge replicated) = 6, plus 2 padded columns of 3 x mean(0.875).
  CHECK(s(0, 0) == doctest::Approx((6.0 + 6 * 0.875) / 9.0));
}

TEST_CASE("smooth_gradient: lone spike") {
  oracle::Matrix raw(6, std::vector<double>(5, 0.0));
  raw[3][3] = 9.0;
  const auto s = smooth_gradient(to_eigen(raw), kBoxKernel);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(s(i, j) - oracle::smoothed(raw, i, j)) <= 1e-12);
  CHECK(s(3, 3) == doctest::Approx(1.0));
  CHECK(s(3, 2) == 0.0);  // causal: the spike never reaches earlier queries
  CHECK(s(3, 5 - 1) == doctest::Approx(1.0));
}

TEST_CASE("property: smooth_gradient matches the window oracle") {
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 30; ++trial) {
    const auto raw = oracle::random_matrix(2 + gen() % 20, 1 + gen() % 12, gen, -3.0, 3.0);
    const auto s = smooth_gradient(to_eigen(raw), kBoxKernel);
    for (std::size_t i = 0; i < raw.size(); ++i)
      for (std::size_t j = 0; j < raw[0].size(); ++j) CHECK(std::abs(s(i, j) - oracle::smoothed(raw, i, j)) <= 1e-12);
  }
}

TEST_CASE("property: default and random kernels match the window oracle") {
  std::mt19937_64 gen(24);
  std::uniform_real_distribution<double> wd(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    SmoothingKernel k = kDefaultKernel;
    if (trial % 2 == 1)
      for (auto& row : k)
        for (auto& v : row) v = wd(gen);
    oracle::Weights ow{};
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) ow[a][b] = k[a][b];
    const auto raw = oracle::random_matrix(2 + gen() % 20, 1 + gen() % 12, gen, -3.0, 3.0);
    const auto s = smooth_gradient(to_eigen(raw), k);
    for (std::size_t i = 0; i < raw.size(); ++i)
      for (std::size_t j = 0; j < raw[0].size(); ++j)
        CHECK(std::abs(s(i, j) - oracle::smoothed(raw, i, j, ow)) <= 1e-12);
  }
}

TEST_CASE("property: smoothing is linear") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> coef(-4.0, 4.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = to_eigen(oracle::random_matrix(12, 9, gen, -1.0, 1.0));
    const auto y = to_eigen(oracle::random_matrix(12, 9, gen, -1.0, 1.0));
    const double a = coef(gen), b = coef(gen);
    const Eigen::MatrixXd lhs = smooth_gradient(a * x + b * y);
    const Eigen::MatrixXd rhs = a * smooth_gradient(x) + b * smooth_gradient(y);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("consensus_predict: self-similarity predicts every query from the third on") {
  SynthConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.alias_rate = 0.0;
  for (std::size_t n : {50, 80, 200}) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      cfg.n_refs = n;
      cfg.seed = seed;
      const auto t = generate_traverse(cfg);
      const auto d = distance_matrix(t.refs, t.refs, Metric::euclidean);
      const auto p = consensus_predict(d, gradient_matrix(d));
      p.check_invariant();
      for (std::size_t j = 2; j < p.size(); ++j) {
        INFO("n ", n, " seed ", seed, " query ", j, " i_d0 ", p.i_d0[j], " i_g0 ", p.i_g0[j]);
        CHECK(p.values[j] == 1);
      }
    }
  }
}

TEST_CASE("consensus_predict: the one-frame boundary") {
  Eigen::MatrixXd dvals = Eigen::MatrixXd::Constant(10, 2, 1.0);
  dvals(2, 0) = 0.1;
  dvals(2, 1) = 0.1;
  const DistanceMatrix d(dvals, Metric::euclidean);
  GradientMatrix g;
  g.raw = Eigen::MatrixXd::Zero(10, 2);
  g.values = Eigen::MatrixXd::Zero(10, 2);
  g.values(3, 0) = 1.0;  // one frame away
  g.values(7, 1) = 1.0;  // five frames away
  const auto p = consensus_predict(d, g);
  CHECK(p.i_d0 == std::vector<std::size_t>{2, 2});
  CHECK(p.i_g0 == std::vector<std::size_t>{3, 7});
  CHECK(p.values == std::vector<std::uint8_t>{1, 0});
  p.check_invariant();

  GradientMatrix wrong;
  wrong.values = Eigen::MatrixXd::Zero(9, 2);
  wrong.raw = wrong.values;
  CHECK_THROWS_AS(consensus_predict(d, wrong), ValidationError);

  auto broken = p;
  broken.values[1] = 1;
  CHECK_THROWS_AS(broken.check_invariant(), ValidationError);
}

TEST_CASE("property: predictions are invariant to a constant shift of D") {
  SynthConfig cfg;
  cfg.n_refs = 120;
  cfg.alias_rate = 0.2;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    const auto t = generate_traverse(cfg);
    const auto d = distance_matrix(t.refs, t.queries, Metric::euclidean);
    const DistanceMatrix shifted((d.values().array() + 3.25).matrix(), Metric::euclidean);
    const auto p = consensus_predict(d, gradient_matrix(d));
    const auto q = consensus_predict(shifted, gradient_matrix(shifted));
    CHECK(p.values == q.values);
    CHECK(p.i_d0 == q.i_d0);
    CHECK(p.i_g0 == q.i_g0);
  }
}

TEST_CASE("property: streaming predictions equal batch predictions bitwise") {
  SynthConfig cfg;
  cfg.n_refs = 150;
  cfg.alias_rate = 0.3;
  cfg.seed = 77;
  const auto t = generate_traverse(cfg);
  const auto d = distance_matrix(t.refs, t.queries, Metric::cosine);
  const auto g = gradient_matrix(d);
  const auto batch = consensus_predict(d, g);
  StreamingPredictor stream;
  for (std::size_t j = 0; j < d.queries(); ++j) {
    const auto step = stream.push(d.column(j));
    CHECK(step.i_d0 == batch.i_d0[j]);
    CHECK(step.i_g0 == batch.i_g0[j]);
    CHECK(step.good == (batch.values[j] == 1));
  }
  CHECK(stream.processed() == d.queries());
}

TEST_CASE("gradient_only_match: notch, ties and scan oracle") {
  Eigen::MatrixXd dvals(7, 1);
  dvals << 4, 3, 1, 0, 1, 3, 4;
  const DistanceMatrix d(dvals, Metric::euclidean);
  CHECK(gradient_only_match(gradient_matrix(d), 0).ref == 3);

  GradientMatrix flat;
  flat.values = Eigen::MatrixXd::Constant(6, 1, 0.5);
  flat.raw = flat.values;
  CHECK(gradient_only_match(flat, 0).ref == 0);
  CHECK_THROWS_AS(gradient_only_match(flat, 1), ValidationError);

  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    GradientMatrix g;
    const auto col = oracle::random_matrix(10, 1, gen, -1.0, 1.0);
    g.values = to_eigen(col);
    g.raw = g.values;
    std::vector<double> flat_col;
    for (const auto& r : col) flat_col.push_back(r[0]);
    const auto m = gradient_only_match(g, 0);
    CHECK(m.ref == oracle::scan_argmax(flat_col));
    CHECK(m.score == flat_col[m.ref]);
  }
}

TEST_CASE("mask_matches") {
  const std::vector<MatchCandidate> c{{0, 4, 0.1}, {1, 5, 0.2}, {2, 6, 0.3}};
  const std::vector<std::uint8_t> ones{1, 1, 1}, zeros{0, 0, 0}, mixed{1, 0, 1};
  CHECK(mask_matches(c, ones).kept == c);
  const auto none = mask_matches(c, zeros);
  CHECK(none.kept.empty());
  CHECK(none.abstentions.size() == 3);
  const auto some = mask_matches(c, mixed);
  REQUIRE(some.kept.size() == 2);
  CHECK(some.kept[0].query == 0);
  CHECK(some.kept[1].query == 2);
  CHECK(some.abstentions == std::vector<MatchCandidate>{c[1]});
  CHECK_THROWS_AS(mask_matches(c, std::vector<std::uint8_t>{1, 0}), ValidationError);
}
