#pragma once

#include "silent/core.hpp"
#include "silent/rng.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace silent {

/// One domain of the two-feature Gaussian model.
///
/// Labels are +1 w.p. eta. Given y, the dominant block is N(y*mu_d, sigma_d^2 I)
/// and the silent block is N(y*gamma*mu_s, sigma_s^2 I). gamma is 1 for the
/// training domain; mu_s is never rescaled in place, gamma is applied at
/// sampling time and inside the risk formulas.
template <typename Scalar>
struct GaussianDomainSpec {
  Vector<Scalar> mu_d;
  Vector<Scalar> mu_s;
  Scalar sigma_d = 1;
  Scalar sigma_s = 1;
  Scalar eta = Scalar(0.5);
  Scalar gamma = 1;
  std::optional<Scalar> silent_norm_bound;

  Eigen::Index p_d() const { return mu_d.size(); }
  Eigen::Index p_s() const { return mu_s.size(); }
  Eigen::Index dim() const { return p_d() + p_s(); }

  /// Throws DomainError on a hard invariant violation. A silent mean exceeding
  /// the optional bound only produces a warning.
  std::vector<std::string> validate() const {
    if (p_d() < 1 || p_s() < 1) throw DomainError("both feature groups need at least one coordinate");
    if (!(sigma_d > 0) || !(sigma_s > 0)) throw DomainError("sigma_d and sigma_s must be positive");
    if (!(eta > 0 && eta < 1)) throw DomainError("eta must lie in (0,1)");
    if (!mu_d.allFinite() || !mu_s.allFinite() || !std::isfinite(static_cast<double>(gamma)))
      throw DomainError("means and gamma must be finite");
    std::vector<std::string> warnings;
    if (silent_norm_bound) {
      if (!(*silent_norm_bound > 0)) throw DomainError("silent_norm_bound must be positive");
      if (!(mu_s.squaredNorm() < *silent_norm_bound))
        warnings.push_back("|mu_s|^2 = " + std::to_string(static_cast<double>(mu_s.squaredNorm())) +
                           " is not below silent_norm_bound");
    }
    return warnings;
  }

  friend bool operator==(const GaussianDomainSpec& a, const GaussianDomainSpec& b) {
    return a.mu_d.size() == b.mu_d.size() && a.mu_s.size() == b.mu_s.size() && a.mu_d == b.mu_d &&
           a.mu_s == b.mu_s && a.sigma_d == b.sigma_d && a.sigma_s == b.sigma_s && a.eta == b.eta &&
           a.gamma == b.gamma && a.silent_norm_bound == b.silent_norm_bound;
  }
};

using DomainSpec = GaussianDomainSpec<double>;

/// Same spec with the silent scaling replaced. The input must be a training spec.
template <typename Scalar>
GaussianDomainSpec<Scalar> test_spec(const GaussianDomainSpec<Scalar>& train, Scalar gamma) {
  if (train.gamma != Scalar(1)) throw ContractError("test_spec expects a training spec (gamma = 1)");
  GaussianDomainSpec<Scalar> out = train;
  out.gamma = gamma;
  return out;
}

template <typename Scalar>
GaussianDomainSpec<Scalar> train_spec_of(const GaussianDomainSpec<Scalar>& spec) {
  GaussianDomainSpec<Scalar> out = spec;
  out.gamma = 1;
  return out;
}

enum class MixingKind { identity, orthogonal };

inline const char* to_string(MixingKind k) { return k == MixingKind::identity ? "identity" : "orthogonal"; }

/// The injective map x = f(z_d, z_s), realized as an orthogonal matrix acting
/// on the concatenated latent (z_d, z_s).
template <typename Scalar>
struct MixingMap {
  MixingKind kind = MixingKind::identity;
  Matrix<Scalar> matrix;
  std::uint64_t seed = 0;

  Eigen::Index dim() const { return matrix.rows(); }

  static MixingMap identity(Eigen::Index dim) {
    return {MixingKind::identity, Matrix<Scalar>::Identity(dim, dim), 0};
  }

  /// Q factor of a seeded Gaussian matrix, with column signs fixed so that
  /// diag(R) > 0 (which makes the factor unique).
  static MixingMap orthogonal(Eigen::Index dim, std::uint64_t seed) {
    CounterRng rng(seed, stream::mixing, 0);
    Matrix<double> g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
      for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix<double>> qr(g);
    Matrix<double> q = qr.householderQ() * Matrix<double>::Identity(dim, dim);
    const Matrix<double> r = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dim; ++j)
      if (r(j, j) < 0) q.col(j) *= -1.0;
    return {MixingKind::orthogonal, q.template cast<Scalar>(), seed};
  }

  template <typename Derived>
  Vector<Scalar> apply(const Eigen::MatrixBase<Derived>& z) const {
    return matrix * z;
  }

  template <typename Derived>
  Vector<Scalar> invert(const Eigen::MatrixBase<Derived>& x) const {
    return matrix.transpose() * x;
  }
};

using Mixing = MixingMap<double>;

template <typename Scalar>
struct LabeledSample {
  Vector<Scalar> x;
  Label y = 1;
  std::optional<std::pair<Vector<Scalar>, Vector<Scalar>>> latent;
};

/// Draws the label and both latent blocks for sample `index` of a dataset
/// seeded with `seed`. Each sample has its own stream: one uniform for the
/// label, then p_d dominant normals, then p_s silent normals.
template <typename Scalar, typename DerivedD, typename DerivedS>
Label draw_latents(const GaussianDomainSpec<Scalar>& spec, std::uint64_t seed, std::uint64_t index,
                   Eigen::MatrixBase<DerivedD>& z_d, Eigen::MatrixBase<DerivedS>& z_s) {
  CounterRng rng(seed, stream::data, index);
  const Label y = rng.uniform() <= static_cast<double>(spec.eta) ? 1 : -1;
  const Scalar ys = static_cast<Scalar>(y);
  for (Eigen::Index j = 0; j < spec.p_d(); ++j)
    z_d(j) = ys * spec.mu_d(j) + spec.sigma_d * static_cast<Scalar>(rng.normal());
  for (Eigen::Index j = 0; j < spec.p_s(); ++j)
    z_s(j) = ys * spec.gamma * spec.mu_s(j) + spec.sigma_s * static_cast<Scalar>(rng.normal());
  return y;
}

/// Immutable sample set. Rows of `x`, `z_d`, `z_s` are samples.
template <typename Scalar>
struct Dataset {
  Matrix<Scalar> x;
  Eigen::VectorXi y;
  Matrix<Scalar> z_d;
  Matrix<Scalar> z_s;
  GaussianDomainSpec<Scalar> spec;
  MixingMap<Scalar> mixing;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return y.size(); }
  bool has_latents() const { return z_d.rows() == y.size() && y.size() > 0; }

  LabeledSample<Scalar> sample(Eigen::Index i) const {
    LabeledSample<Scalar> s;
    s.x = x.row(i).transpose();
    s.y = y(i);
    if (has_latents()) s.latent.emplace(z_d.row(i).transpose(), z_s.row(i).transpose());
    return s;
  }
};

using Data = Dataset<double>;

template <typename Scalar>
void check_dimensions(const GaussianDomainSpec<Scalar>& spec, const MixingMap<Scalar>& mixing) {
  if (mixing.matrix.rows() != spec.dim() || mixing.matrix.cols() != spec.dim())
    throw ConfigError("mixing map is " + std::to_string(mixing.matrix.rows()) + "x" +
                      std::to_string(mixing.matrix.cols()) + " but the spec has p_d+p_s = " +
                      std::to_string(spec.dim()));
}

template <typename Scalar>
Dataset<Scalar> sample_domain(const GaussianDomainSpec<Scalar>& spec, const MixingMap<Scalar>& mixing,
                              Eigen::Index n, std::uint64_t seed) {
  spec.validate();
  check_dimensions(spec, mixing);
  if (n < 1) throw ContractError("sample_domain needs n >= 1");

  Dataset<Scalar> data;
  data.spec = spec;
  data.mixing = mixing;
  data.seed = seed;
  data.x.resize(n, spec.dim());
  data.y.resize(n);
  data.z_d.resize(n, spec.p_d());
  data.z_s.resize(n, spec.p_s());

  Vector<Scalar> zd(spec.p_d()), zs(spec.p_s()), z(spec.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    data.y(i) = draw_latents(spec, seed, static_cast<std::uint64_t>(i), zd, zs);
    data.z_d.row(i) = zd.transpose();
    data.z_s.row(i) = zs.transpose();
    if (mixing.kind == MixingKind::identity) {
      data.x.row(i) << zd.transpose(), zs.transpose();
    } else {
      z << zd, zs;
      data.x.row(i) = (mixing.matrix * z).transpose();
    }
  }
  return data;
}

}  // namespace silent
