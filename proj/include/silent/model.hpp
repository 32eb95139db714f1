#pragma once

#include "silent/analytic_risk.hpp"

namespace silent {

/// Linear featurizer followed by a linear head: score(x) = head . (W x) + b.
/// The head's d/s split refers to the featurizer's output coordinates.
struct TwoStageModel {
  Eigen::MatrixXd featurizer;
  Classifier head;

  Eigen::Index p_d() const { return head.p_d(); }
  Eigen::Index p_s() const { return head.p_s(); }
  Eigen::Index dim() const { return featurizer.cols(); }

  template <typename Derived>
  Eigen::VectorXd features(const Eigen::MatrixBase<Derived>& x) const {
    return featurizer * x;
  }

  template <typename Derived>
  double score(const Eigen::MatrixBase<Derived>& x) const {
    return head.score(featurizer * x);
  }

  template <typename Derived>
  Label predict(const Eigen::MatrixBase<Derived>& x) const {
    return score(x) >= 0.0 ? 1 : -1;
  }

  /// Scores for every row of x.
  Eigen::VectorXd scores(const Eigen::MatrixXd& x) const {
    const Eigen::VectorXd v = featurizer.transpose() * head.direction();
    return (x * v).array() + head.beta_0;
  }

  /// Parameter layout: vec(W) column-major, head_d, head_s, bias.
  Eigen::Index num_params() const { return featurizer.size() + dim() + 1; }

  Eigen::VectorXd flatten() const {
    Eigen::VectorXd p(num_params());
    p.head(featurizer.size()) = Eigen::Map<const Eigen::VectorXd>(featurizer.data(), featurizer.size());
    p.segment(featurizer.size(), dim()) = head.direction();
    p(p.size() - 1) = head.beta_0;
    return p;
  }

  void assign(const Eigen::VectorXd& p) {
    if (p.size() != num_params()) throw ContractError("parameter vector has the wrong length");
    featurizer = Eigen::Map<const Eigen::MatrixXd>(p.data(), featurizer.rows(), featurizer.cols());
    head.beta_d = p.segment(featurizer.size(), p_d());
    head.beta_s = p.segment(featurizer.size() + p_d(), p_s());
    head.beta_0 = p(p.size() - 1);
  }

  friend bool operator==(const TwoStageModel& a, const TwoStageModel& b) {
    return a.featurizer.rows() == b.featurizer.rows() && a.featurizer.cols() == b.featurizer.cols() &&
           a.featurizer == b.featurizer && a.head.beta_d == b.head.beta_d && a.head.beta_s == b.head.beta_s &&
           a.head.beta_0 == b.head.beta_0;
  }
};

}  // namespace silent
