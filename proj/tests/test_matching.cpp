#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vpr/error.hpp"
#include "vpr/matching.hpp"

using namespace vpr;

namespace {

DescriptorSet rows(std::initializer_list<std::vector<double>> values) {
  std::vector<Descriptor> ds;
  for (const auto& v : values) ds.push_back({v, ds.size()});
  return DescriptorSet(ds, DescriptorKind::external);
}

DescriptorSet random_set(std::size_t count, std::size_t dim, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(count, dim);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(gen);
  return DescriptorSet(m, DescriptorKind::external);
}

DistanceMatrix from_columns(const std::vector<std::vector<double>>& cols) {
  Eigen::MatrixXd m(cols.front().size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < cols[j].size(); ++i) m(i, j) = cols[j][i];
  return DistanceMatrix(m, Metric::euclidean);
}

}  // namespace

TEST_CASE("distance_matrix: self similarity has an exactly zero diagonal") {
  std::mt19937_64 gen(1);
  const auto set = random_set(30, 8, gen);
  for (auto metric : {Metric::euclidean, Metric::sad}) {
    const auto d = distance_matrix(set, set, metric);
    for (std::size_t j = 0; j < 30; ++j) CHECK(d(j, j) == 0.0);
  }
  const auto c = distance_matrix(set, set, Metric::cosine);
  for (std::size_t j = 0; j < 30; ++j) CHECK(std::abs(c(j, j)) < 1e-12);
}

TEST_CASE("distance_matrix: hand computed euclidean column") {
  const auto d = distance_matrix(rows({{1, 0}, {0, 1}}), rows({{1, 0}}), Metric::euclidean);
  CHECK(d.refs() == 2);
  CHECK(d.queries() == 1);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(1, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("distance_matrix: cosine with a zero vector is 1 and counted") {
  const auto d = distance_matrix(rows({{1, 0}, {0, 0}}), rows({{1, 1}}), Metric::cosine);
  CHECK(d(1, 0) == 1.0);
  CHECK(d.zero_vector_count() == 1);
  CHECK(d(0, 0) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
  // Opposite vectors clamp at 2.
  CHECK(distance_matrix(rows({{1, 0}, {0, 1}}), rows({{-1, 0}}), Metric::cosine)(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("distance_matrix: input validation") {
  CHECK_THROWS_AS(distance_matrix(rows({{1, 0}, {0, 1}}), rows({{1, 0, 0}}), Metric::euclidean), ValidationError);
  CHECK_THROWS_AS(distance_matrix(rows({{1, 0}}), rows({{1, 0}}), Metric::euclidean), ValidationError);
  Eigen::MatrixXd bad(2, 1);
  bad << 1.0, -0.1;
  CHECK_THROWS_AS(DistanceMatrix(bad, Metric::euclidean), ValidationError);
  bad << 1.0, NAN;
  CHECK_THROWS_AS(DistanceMatrix(bad, Metric::euclidean), ValidationError);
}

TEST_CASE("best_match: scan oracle, ties and range") {
  const auto d = from_columns({{0.3, 0.1, 0.5}, {2, 2, 2}});
  const auto m = best_match(d, 0);
  CHECK(m.ref == 1);
  CHECK(m.score == 0.1);
  CHECK(m.query == 0);
  CHECK(best_match(d, 1).ref == 0);
  CHECK_THROWS_AS(best_match(d, 2), ValidationError);

  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cols = oracle::random_matrix(10, 4, gen);
    const auto dm = from_columns(cols);
    for (std::size_t j = 0; j < 4; ++j) CHECK(best_match(dm, j).ref == oracle::scan_argmin(cols[j]));
  }
}

TEST_CASE("property: distinct self-similar descriptors match themselves") {
  std::mt19937_64 gen(7);
  const auto set = random_set(60, 16, gen);
  for (auto metric : {Metric::euclidean, Metric::cosine, Metric::sad}) {
    const auto d = distance_matrix(set, set, metric);
    for (std::size_t j = 0; j < d.queries(); ++j) CHECK(best_match(d, j).ref == j);
  }
}

TEST_CASE("property: distance matrices are symmetric under swapping sets") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_set(5 + trial, 6, gen);
    const auto b = random_set(3 + trial, 6, gen);
    for (auto metric : {Metric::euclidean, Metric::cosine, Metric::sad}) {
      const auto ab = distance_matrix(a, b, metric);
      const auto ba = distance_matrix(b, a, metric);
      for (std::size_t i = 0; i < ab.refs(); ++i)
        for (std::size_t j = 0; j < ab.queries(); ++j) CHECK(std::abs(ab(i, j) - ba(j, i)) <= 1e-12);
    }
  }
}

TEST_CASE("property: cosine argmin is invariant to positive scaling") {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto refs = random_set(40, 12, gen);
    const auto queries = random_set(10, 12, gen);
    const double scale = 0.01 + 100.0 * std::uniform_real_distribution<double>()(gen);
    const DescriptorSet scaled(refs.as_rows() * scale, DescriptorKind::external);
    const auto d = distance_matrix(refs, queries, Metric::cosine);
    const auto ds = distance_matrix(scaled, queries, Metric::cosine);
    for (std::size_t j = 0; j < d.queries(); ++j) CHECK(best_match(d, j).ref == best_match(ds, j).ref);
  }
}
