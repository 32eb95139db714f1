#pragma once

#include "silent/domain_model.hpp"

#include <cmath>
#include <utility>

namespace silent {

template <typename Scalar>
struct SuppressionWeights {
  Scalar w_d = 1;
  Scalar w_s = 1;

  void validate() const {
    if (!(w_d >= 0 && w_d <= 1) || !(w_s >= 0 && w_s <= 1))
      throw DomainError("suppression weights must lie in [0,1]");
  }
};

using Weights = SuppressionWeights<double>;

// Mean-scaling, variance-preserving channel: z~ = w z + sqrt(1 - w^2) eps with
// eps ~ N(0, sigma^2 I). If z ~ N(y m, sigma^2 I) then z~ ~ N(y w m, sigma^2 I).
// w == 1 returns z untouched and draws nothing from the stream.
template <typename Scalar, typename Derived>
Vector<Scalar> suppress_latents(const Eigen::MatrixBase<Derived>& z, Scalar w, Scalar sigma, CounterRng& rng) {
  if (!(w >= 0 && w <= 1)) throw DomainError("suppression weight must lie in [0,1]");
  Vector<Scalar> out = z;
  if (w == Scalar(1)) return out;
  const Scalar noise_scale = std::sqrt(Scalar(1) - w * w) * sigma;
  for (Eigen::Index j = 0; j < out.size(); ++j) out(j) = w * out(j) + noise_scale * static_cast<Scalar>(rng.normal());
  return out;
}

template <typename Scalar, typename Derived>
Vector<Scalar> suppress_latents(const Eigen::MatrixBase<Derived>& z, Scalar w, Scalar sigma, std::uint64_t rng_seed) {
  CounterRng rng(rng_seed, stream::noise, 0);
  return suppress_latents<Scalar>(z, w, sigma, rng);
}

/// Oracle featurizer x -> (z~_d, z~_s): exact latent recovery through the
/// transpose of the mixing matrix followed by per-group suppression.
///
/// Noise for sample `index` comes from its own stream keyed by (seed, index),
/// dominant group first. Instances are immutable and safe to share.
template <typename Scalar>
class SuppressedFeaturizer {
 public:
  SuppressedFeaturizer(MixingMap<Scalar> mixing, SuppressionWeights<Scalar> weights, Eigen::Index p_d,
                       Scalar sigma_d, Scalar sigma_s, std::uint64_t seed)
      : mixing_(std::move(mixing)), weights_(weights), p_d_(p_d), sigma_d_(sigma_d), sigma_s_(sigma_s), seed_(seed) {}

  Eigen::Index p_d() const { return p_d_; }
  Eigen::Index p_s() const { return mixing_.dim() - p_d_; }
  const SuppressionWeights<Scalar>& weights() const { return weights_; }
  std::uint64_t seed() const { return seed_; }

  /// Writes the suppressed features of x into `out` (length p_d + p_s).
  template <typename DerivedX, typename DerivedOut>
  void apply(const Eigen::MatrixBase<DerivedX>& x, std::uint64_t index, Eigen::MatrixBase<DerivedOut>& out) const {
    out = mixing_.matrix.transpose() * x;
    CounterRng rng(seed_, stream::noise, index);
    scale_block(out.head(p_d_), weights_.w_d, sigma_d_, rng);
    scale_block(out.tail(p_s()), weights_.w_s, sigma_s_, rng);
  }

  template <typename DerivedX>
  std::pair<Vector<Scalar>, Vector<Scalar>> operator()(const Eigen::MatrixBase<DerivedX>& x, std::uint64_t index) const {
    Vector<Scalar> z(mixing_.dim());
    apply(x, index, z);
    return {z.head(p_d_), z.tail(p_s())};
  }

  /// Row-wise application; row i uses noise stream i.
  Matrix<Scalar> transform(const Matrix<Scalar>& x) const {
    Matrix<Scalar> out(x.rows(), x.cols());
    Vector<Scalar> z(x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      apply(x.row(i).transpose(), static_cast<std::uint64_t>(i), z);
      out.row(i) = z.transpose();
    }
    return out;
  }

 private:
  template <typename Block>
  static void scale_block(Block&& block, Scalar w, Scalar sigma, CounterRng& rng) {
    if (w == Scalar(1)) return;
    const Scalar noise_scale = std::sqrt(Scalar(1) - w * w) * sigma;
    for (Eigen::Index j = 0; j < block.size(); ++j)
      block(j) = w * block(j) + noise_scale * static_cast<Scalar>(rng.normal());
  }

  MixingMap<Scalar> mixing_;
  SuppressionWeights<Scalar> weights_;
  Eigen::Index p_d_;
  Scalar sigma_d_;
  Scalar sigma_s_;
  std::uint64_t seed_;
};

template <typename Scalar>
SuppressedFeaturizer<Scalar> suppressed_featurizer(const MixingMap<Scalar>& mixing,
                                                   const SuppressionWeights<Scalar>& weights,
                                                   const GaussianDomainSpec<Scalar>& spec, std::uint64_t seed) {
  weights.validate();
  check_dimensions(spec, mixing);
  return SuppressedFeaturizer<Scalar>(mixing, weights, spec.p_d(), spec.sigma_d, spec.sigma_s, seed);
}

}  // namespace silent
