#pragma once

#include "silent/suppression.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace silent {

/// Standard normal CDF via erfc, which keeps full relative accuracy in the
/// lower tail. Saturates to exactly 0 / 1 at -inf / +inf.
template <typename Scalar>
Scalar std_normal_cdf(Scalar x) {
  if (std::isnan(x)) throw DomainError("std_normal_cdf: NaN input");
  return Scalar(0.5) * std::erfc(-x / std::numbers::sqrt2_v<Scalar>);
}

/// sign(beta_d . z_d + beta_s . z_s + beta_0), with sign(0) = +1.
template <typename Scalar>
struct LinearClassifier {
  Vector<Scalar> beta_d;
  Vector<Scalar> beta_s;
  Scalar beta_0 = 0;

  Eigen::Index p_d() const { return beta_d.size(); }
  Eigen::Index p_s() const { return beta_s.size(); }

  template <typename DerivedD, typename DerivedS>
  Scalar score(const Eigen::MatrixBase<DerivedD>& z_d, const Eigen::MatrixBase<DerivedS>& z_s) const {
    return beta_d.dot(z_d) + beta_s.dot(z_s) + beta_0;
  }

  /// Score of the concatenated feature vector (z_d, z_s).
  template <typename Derived>
  Scalar score(const Eigen::MatrixBase<Derived>& z) const {
    return beta_d.dot(z.head(p_d())) + beta_s.dot(z.tail(p_s())) + beta_0;
  }

  template <typename Derived>
  Label predict(const Eigen::MatrixBase<Derived>& z) const {
    return score(z) >= Scalar(0) ? 1 : -1;
  }

  Vector<Scalar> direction() const {
    Vector<Scalar> v(p_d() + p_s());
    v << beta_d, beta_s;
    return v;
  }
};

using Classifier = LinearClassifier<double>;

template <typename Scalar>
struct RiskReport {
  enum class Method { closed_form, monte_carlo };

  Scalar train_risk = 0;
  Scalar test_risk = 0;
  SuppressionWeights<Scalar> weights;
  Scalar gamma = 1;
  Method method = Method::closed_form;
};

inline const char* to_string(RiskReport<double>::Method m) {
  return m == RiskReport<double>::Method::closed_form ? "closed_form" : "monte_carlo";
}

/// Training-domain Bayes classifier on top of the (w_d, w_s)-suppressed features.
template <typename Scalar>
LinearClassifier<Scalar> bayes_classifier(const GaussianDomainSpec<Scalar>& spec,
                                          const SuppressionWeights<Scalar>& weights) {
  weights.validate();
  LinearClassifier<Scalar> beta;
  beta.beta_d = (Scalar(2) * weights.w_d / (spec.sigma_d * spec.sigma_d)) * spec.mu_d;
  beta.beta_s = (Scalar(2) * weights.w_s / (spec.sigma_s * spec.sigma_s)) * spec.mu_s;
  beta.beta_0 = std::log(spec.eta / (Scalar(1) - spec.eta));
  return beta;
}

namespace detail {

// Risk of a constant predictor sign(beta_0): it predicts +1 when beta_0 >= 0 and
// then errs on the (1 - eta) mass of negatives.
template <typename Scalar>
Scalar constant_predictor_risk(Scalar eta, Scalar beta_0) {
  return beta_0 >= Scalar(0) ? Scalar(1) - eta : eta;
}

// eta * F(-(m + b) / s) + (1 - eta) * F(-(m - b) / s)
template <typename Scalar>
Scalar mixture_risk(Scalar eta, Scalar margin, Scalar bias, Scalar scale) {
  return eta * std_normal_cdf<Scalar>(-(margin + bias) / scale) +
         (Scalar(1) - eta) * std_normal_cdf<Scalar>(-(margin - bias) / scale);
}

}  // namespace detail

/// Expected 0-1 risk of an arbitrary linear classifier on suppressed features.
/// `spec.gamma` is used only when domain == test.
template <typename Scalar>
Scalar linear_classifier_risk(const GaussianDomainSpec<Scalar>& spec, const SuppressionWeights<Scalar>& weights,
                              const LinearClassifier<Scalar>& beta, Domain domain) {
  weights.validate();
  if (beta.p_d() != spec.p_d() || beta.p_s() != spec.p_s())
    throw ConfigError("classifier dimensions do not match the domain spec");
  const Scalar g = domain == Domain::test ? spec.gamma : Scalar(1);
  const Scalar margin = weights.w_d * beta.beta_d.dot(spec.mu_d) + weights.w_s * g * beta.beta_s.dot(spec.mu_s);
  const Scalar scale = std::sqrt(spec.sigma_d * spec.sigma_d * beta.beta_d.squaredNorm() +
                                 spec.sigma_s * spec.sigma_s * beta.beta_s.squaredNorm());
  if (scale == Scalar(0)) return detail::constant_predictor_risk(spec.eta, beta.beta_0);
  return detail::mixture_risk(spec.eta, margin, beta.beta_0, scale);
}

/// Expected risk of the training-domain Bayes classifier on (w_d, w_s)-suppressed
/// features, in closed form.
///
/// With a = w_d^2 |mu_d|^2 / sigma_d^2 and b = w_s^2 |mu_s|^2 / sigma_s^2 the
/// score of the Bayes rule is Gaussian with mean 2(a + g b) y + log-odds and
/// standard deviation 2 sqrt(a + b), so
///   R = eta F(-(a + g b + L/2)/sqrt(a + b)) + (1 - eta) F(-(a + g b - L/2)/sqrt(a + b)),
/// L = log(eta / (1 - eta)), g = gamma on the test domain and 1 otherwise.
/// When a + b = 0 the features are uninformative and the rule is the constant
/// majority-class predictor with risk min(eta, 1 - eta).
template <typename Scalar>
Scalar bayes_risk(const GaussianDomainSpec<Scalar>& spec, const SuppressionWeights<Scalar>& weights, Domain domain) {
  weights.validate();
  const Scalar g = domain == Domain::test ? spec.gamma : Scalar(1);
  const Scalar a = weights.w_d * weights.w_d * spec.mu_d.squaredNorm() / (spec.sigma_d * spec.sigma_d);
  const Scalar b = weights.w_s * weights.w_s * spec.mu_s.squaredNorm() / (spec.sigma_s * spec.sigma_s);
  const Scalar log_odds = std::log(spec.eta / (Scalar(1) - spec.eta));
  if (a + b == Scalar(0)) return detail::constant_predictor_risk(spec.eta, log_odds);
  return detail::mixture_risk(spec.eta, a + g * b, log_odds / Scalar(2), std::sqrt(a + b));
}

template <typename Scalar>
RiskReport<Scalar> bayes_risk_report(const GaussianDomainSpec<Scalar>& spec, const SuppressionWeights<Scalar>& weights) {
  RiskReport<Scalar> r;
  r.train_risk = bayes_risk(spec, weights, Domain::train);
  r.test_risk = bayes_risk(spec, weights, Domain::test);
  r.weights = weights;
  r.gamma = spec.gamma;
  r.method = RiskReport<Scalar>::Method::closed_form;
  return r;
}

}  // namespace silent
