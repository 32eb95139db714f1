#pragma once

#include "silent/analytic_risk.hpp"
#include "silent/model.hpp"
#include "silent/parallel.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace silent {

/// Empirical 0-1 risk with its binomial standard error.
struct RiskEstimate {
  double mean = 0;
  double std_error = 0;
  std::int64_t n = 0;
  std::uint64_t seed = 0;

  static RiskEstimate from_counts(std::int64_t errors, std::int64_t n, std::uint64_t seed) {
    RiskEstimate e;
    e.n = n;
    e.seed = seed;
    e.mean = n > 0 ? static_cast<double>(errors) / static_cast<double>(n) : 0.0;
    e.std_error = n > 0 ? std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(n)) : 0.0;
    return e;
  }
};

inline constexpr std::int64_t kMcChunk = 1 << 16;

/// Simulates the suppressed-feature pipeline sign(beta . Phi(x) + beta_0) on n
/// fresh samples from the requested domain and counts misclassifications.
///
/// Data and suppression noise come from independent streams derived from
/// `seed`. Samples are processed in fixed chunks whose integer error counts
/// are summed, so the result does not depend on `jobs`.
inline RiskEstimate mc_risk(const DomainSpec& spec, const Weights& weights, const Classifier& beta, Domain domain,
                            const Mixing& mixing, std::int64_t n, std::uint64_t seed, unsigned jobs = 1) {
  if (n < 1000) throw ContractError("mc_risk needs n >= 1000");
  spec.validate();
  check_dimensions(spec, mixing);
  if (beta.p_d() != spec.p_d() || beta.p_s() != spec.p_s())
    throw ConfigError("classifier dimensions do not match the domain spec");

  const DomainSpec sampled = domain == Domain::test ? spec : train_spec_of(spec);
  const std::uint64_t data_seed = derive_seed(seed, stream::data);
  const auto featurizer = suppressed_featurizer(mixing, weights, spec, derive_seed(seed, stream::noise));
  const bool identity = mixing.kind == MixingKind::identity;

  const std::int64_t chunks = (n + kMcChunk - 1) / kMcChunk;
  std::vector<std::int64_t> errors(static_cast<std::size_t>(chunks), 0);
  parallel_for(static_cast<std::size_t>(chunks), jobs, [&](std::size_t c) {
    Eigen::VectorXd zd(spec.p_d()), zs(spec.p_s()), z(spec.dim()), x(spec.dim()), phi(spec.dim());
    const std::int64_t begin = static_cast<std::int64_t>(c) * kMcChunk;
    const std::int64_t end = std::min(n, begin + kMcChunk);
    std::int64_t count = 0;
    for (std::int64_t i = begin; i < end; ++i) {
      const auto index = static_cast<std::uint64_t>(i);
      const Label y = draw_latents(sampled, data_seed, index, zd, zs);
      z << zd, zs;
      if (identity) x = z;
      else x.noalias() = mixing.matrix * z;
      featurizer.apply(x, index, phi);
      if (beta.predict(phi) != y) ++count;
    }
    errors[c] = count;
  });
  std::int64_t total = 0;
  for (auto e : errors) total += e;
  return RiskEstimate::from_counts(total, n, seed);
}

/// Fraction of dataset samples where the model's prediction differs from y.
inline RiskEstimate mc_model_risk(const TwoStageModel& model, const Data& data) {
  if (data.size() == 0) throw ContractError("mc_model_risk needs a nonempty dataset");
  if (data.x.cols() != model.dim()) throw ConfigError("model and dataset dimensions differ");
  const Eigen::VectorXd s = model.scores(data.x);
  std::int64_t errors = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i)
    if ((s(i) >= 0.0 ? 1 : -1) != data.y(i)) ++errors;
  return RiskEstimate::from_counts(errors, data.size(), data.seed);
}

}  // namespace silent
