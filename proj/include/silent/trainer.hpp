#pragma once

#include "silent/domain_model.hpp"
#include "silent/model.hpp"
#include "silent/swad.hpp"

#include <optional>
#include <string>
#include <vector>

namespace silent {

/// Desk-scale stand-ins for pretrained backbones.
struct PretrainKind {
  enum class Kind { oracle_silent, oracle_dominant, noisy_oracle };
  Kind kind = Kind::oracle_silent;
  double noise_scale = 0.0;  // noisy_oracle only

  static PretrainKind oracle_silent() { return {Kind::oracle_silent, 0.0}; }
  static PretrainKind oracle_dominant() { return {Kind::oracle_dominant, 0.0}; }
  static PretrainKind noisy_oracle(double eps) { return {Kind::noisy_oracle, eps}; }
};

std::string to_string(const PretrainKind& k);
PretrainKind parse_pretrain_kind(const std::string& s);

enum class Schedule { erm, lp_only, lp_ft };

const char* to_string(Schedule s);
Schedule parse_schedule(const std::string& s);

struct TrainConfig {
  double lr_lp = 0.1;
  double lr_ft = 0.1;
  std::int64_t lp_iters = 0;
  std::int64_t ft_iters = 1000;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> minibatch;  // absent: full batch
  std::int64_t log_interval = 10;         // trace cadence when SWAD is off

  void validate() const;
};

struct TraceRow {
  std::int64_t iter = 0;
  std::string phase;
  double train_loss = 0;
  double val_loss = 0;
  bool swad_active = false;
};

struct TrainResult {
  TwoStageModel model;          // SWAD average when averaging ran, else the final iterate
  TwoStageModel final_iterate;
  std::vector<TraceRow> trace;
  std::optional<SwadReport> swad;
  std::vector<Eigen::Index> val_indices;
};

/// Featurizer W = f^T (oracle_silent), f^T with the silent output rows zeroed
/// (oracle_dominant), or f^T plus eps * seeded Gaussian noise (noisy_oracle).
/// The head starts at zero.
TwoStageModel init_pretrained(const Mixing& mixing, Eigen::Index p_d, const PretrainKind& kind, std::uint64_t seed);

struct LossAndGradient {
  double loss = 0;
  Eigen::MatrixXd grad_featurizer;
  Eigen::VectorXd grad_head;  // d block then s block
  double grad_bias = 0;

  Eigen::VectorXd flatten() const;
};

/// Mean logistic loss log(1 + exp(-y s)) over the rows of x.
double logistic_loss(const TwoStageModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXi& y);

LossAndGradient logistic_loss_and_gradient(const TwoStageModel& model, const Eigen::MatrixXd& x,
                                           const Eigen::VectorXi& y);

/// Deterministic train/validation split: a seeded permutation whose last
/// ceil(val_fraction * n) entries are the validation set.
std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(Eigen::Index n, double val_fraction,
                                                                              std::uint64_t seed);

/// Gradient descent on the logistic loss.
///
///  - erm:     lp_iters + ft_iters full-parameter steps at lr_ft
///  - lp_only: lp_iters + ft_iters head-only steps at lr_lp
///  - lp_ft:   lp_iters head-only steps at lr_lp, then ft_iters full steps at lr_ft
///
/// Weight averaging, when configured, runs over the full-parameter steps only.
TrainResult train(const TwoStageModel& init, const Data& data, const TrainConfig& cfg, Schedule schedule,
                  const std::optional<SwadConfig>& swad = std::nullopt);

/// Mean over samples of |W_after x - W_before x|.
double feature_distortion(const TwoStageModel& before, const TwoStageModel& after, const Eigen::MatrixXd& x);

/// head o featurizer as one rule on the latent (z_d, z_s), using z = f^T x.
Classifier effective_rule(const TwoStageModel& model, const Mixing& mixing);

/// Fraction of the featurizer's squared Frobenius norm, measured in latent
/// coordinates (W f), carried by the silent latent columns.
double silent_share(const TwoStageModel& model, const Mixing& mixing);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace silent
