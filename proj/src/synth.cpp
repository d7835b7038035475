#include "vpr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vpr/error.hpp"
#include "vpr/rng.hpp"

namespace vpr {
namespace {

constexpr const char* kModule = "synth";

// Seed streams for independent parts of the generator.
constexpr std::uint64_t kQueryStream = 0x9e3779b97f4a7c15ULL;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void SynthConfig::validate() const {
  if (n_refs < 2) throw ValidationError(kModule, "n_refs must be at least 2");
  if (descriptor_dim < 1) throw ValidationError(kModule, "descriptor_dim must be at least 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ValidationError(kModule, "noise_sigma must be >= 0");
  if (!(step_sigma > 0.0) || !std::isfinite(step_sigma)) throw ValidationError(kModule, "step_sigma must be > 0");
  if (!is_probability(alias_rate)) throw ValidationError(kModule, "alias_rate must lie in [0,1]");
  if (!is_probability(alias_strength)) throw ValidationError(kModule, "alias_strength must lie in [0,1]");
  if (drift >= n_refs) throw ValidationError(kModule, "drift must be smaller than n_refs");
}

void PredictorQualityConfig::validate() const {
  if (!is_probability(flip_good_to_bad) || !is_probability(flip_bad_to_good))
    throw ValidationError(kModule, "flip probabilities must lie in [0,1]");
}

Traverse generate_traverse(const SynthConfig& cfg) {
  cfg.validate();
  const auto n = cfg.n_refs;
  const auto m = cfg.queries();
  const auto dim = static_cast<Eigen::Index>(cfg.descriptor_dim);

  Rng walk(cfg.seed);
  Eigen::MatrixXd refs(static_cast<Eigen::Index>(n), dim);
  for (Eigen::Index k = 0; k < dim; ++k) refs(0, k) = walk.normal();
  for (Eigen::Index i = 1; i < static_cast<Eigen::Index>(n); ++i)
    for (Eigen::Index k = 0; k < dim; ++k) refs(i, k) = refs(i - 1, k) + walk.normal(0.0, cfg.step_sigma);

  // Aliased queries are pulled to a reference at least this far away.
  const std::size_t min_separation = std::max<std::size_t>(3, n / 10);

  Rng rng(cfg.seed ^ kQueryStream);
  Eigen::MatrixXd queries(static_cast<Eigen::Index>(m), dim);
  GroundTruth gt;
  gt.gt_ref.resize(m);
  std::vector<std::uint8_t> aliased(m, 0);
  long offset = 0;
  const long drift = static_cast<long>(cfg.drift);
  for (std::size_t j = 0; j < m; ++j) {
    if (drift > 0 && rng.bernoulli(0.1)) offset = std::clamp(offset + (rng.bernoulli(0.5) ? 1L : -1L), -drift, drift);
    const double base = m == 1 ? 0.0 : std::round(static_cast<double>(j) * static_cast<double>(n - 1) / static_cast<double>(m - 1));
    const auto truth = static_cast<std::size_t>(std::clamp(static_cast<long>(base) + offset, 0L, static_cast<long>(n) - 1));
    gt.gt_ref[j] = truth;

    const auto row = static_cast<Eigen::Index>(j);
    queries.row(row) = refs.row(static_cast<Eigen::Index>(truth));
    if (cfg.noise_sigma > 0.0)
      for (Eigen::Index k = 0; k < dim; ++k) queries(row, k) += rng.normal(0.0, cfg.noise_sigma);

    if (cfg.alias_rate > 0.0 && rng.bernoulli(cfg.alias_rate)) {
      if (n <= 2 * min_separation) throw ValidationError(kModule, "too few references to place an aliased query");
      std::size_t far = truth;
      while ((far > truth ? far - truth : truth - far) < min_separation) far = static_cast<std::size_t>(rng.below(n));
      queries.row(row) += cfg.alias_strength * (refs.row(static_cast<Eigen::Index>(far)) - refs.row(static_cast<Eigen::Index>(truth)));
      aliased[j] = 1;
    }
  }

  return Traverse{DescriptorSet(std::move(refs), DescriptorKind::external),
                  DescriptorSet(std::move(queries), DescriptorKind::external), std::move(gt), std::move(aliased)};
}

std::vector<std::uint8_t> degrade_predictions(std::span<const std::uint8_t> pred, const PredictorQualityConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<std::uint8_t> out(pred.begin(), pred.end());
  for (auto& bit : out) {
    const double p = bit ? cfg.flip_good_to_bad : cfg.flip_bad_to_good;
    if (rng.bernoulli(p)) bit = bit ? 0 : 1;
  }
  return out;
}

std::vector<std::uint8_t> perfect_predictions(std::span<const MatchCandidate> candidates, const GroundTruth& gt) {
  std::vector<std::uint8_t> out(candidates.size(), 0);
  for (std::size_t k = 0; k < candidates.size(); ++k)
    out[k] = gt.in_tolerance(candidates[k].query, candidates[k].ref) ? 1 : 0;
  return out;
}

}  // namespace vpr
