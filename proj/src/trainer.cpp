#include "silent/trainer.hpp"

#include <cmath>
#include <numeric>

namespace silent {

std::string to_string(const PretrainKind& k) {
  switch (k.kind) {
    case PretrainKind::Kind::oracle_silent: return "oracle_silent";
    case PretrainKind::Kind::oracle_dominant: return "oracle_dominant";
    case PretrainKind::Kind::noisy_oracle: return "noisy_oracle";
  }
  return "?";
}

PretrainKind parse_pretrain_kind(const std::string& s) {
  if (s == "oracle_silent") return PretrainKind::oracle_silent();
  if (s == "oracle_dominant") return PretrainKind::oracle_dominant();
  if (s == "noisy_oracle") return PretrainKind::noisy_oracle(0.0);
  throw ConfigError("unknown pretrain kind '" + s + "'");
}

const char* to_string(Schedule s) {
  switch (s) {
    case Schedule::erm: return "erm";
    case Schedule::lp_only: return "lp_only";
    case Schedule::lp_ft: return "lp_ft";
  }
  return "?";
}

Schedule parse_schedule(const std::string& s) {
  if (s == "erm") return Schedule::erm;
  if (s == "lp_only") return Schedule::lp_only;
  if (s == "lp_ft") return Schedule::lp_ft;
  throw ConfigError("unknown schedule '" + s + "'");
}

void TrainConfig::validate() const {
  if (!(lr_lp > 0) || !(lr_ft > 0)) throw ConfigError("learning rates must be positive");
  if (lp_iters < 0 || ft_iters < 0) throw ConfigError("iteration counts must be non-negative");
  if (lp_iters + ft_iters <= 0) throw ConfigError("lp_iters + ft_iters must be positive");
  if (!(val_fraction > 0 && val_fraction < 1)) throw ConfigError("val_fraction must lie in (0,1)");
  if (minibatch && *minibatch < 1) throw ConfigError("minibatch must be >= 1");
  if (log_interval < 1) throw ConfigError("log_interval must be >= 1");
}

TwoStageModel init_pretrained(const Mixing& mixing, Eigen::Index p_d, const PretrainKind& kind, std::uint64_t seed) {
  const Eigen::Index dim = mixing.dim();
  if (p_d < 1 || p_d >= dim) throw ConfigError("p_d must leave at least one silent coordinate");
  if (!(kind.noise_scale >= 0)) throw DomainError("pretrain noise scale must be >= 0");

  TwoStageModel m;
  m.featurizer = mixing.matrix.transpose();
  switch (kind.kind) {
    case PretrainKind::Kind::oracle_silent: break;
    case PretrainKind::Kind::oracle_dominant: m.featurizer.bottomRows(dim - p_d).setZero(); break;
    case PretrainKind::Kind::noisy_oracle:
      if (kind.noise_scale > 0) {
        CounterRng rng(seed, stream::pretrain, 0);
        for (Eigen::Index j = 0; j < dim; ++j)
          for (Eigen::Index i = 0; i < dim; ++i) m.featurizer(i, j) += kind.noise_scale * rng.normal();
      }
      break;
  }
  m.head.beta_d = Eigen::VectorXd::Zero(p_d);
  m.head.beta_s = Eigen::VectorXd::Zero(dim - p_d);
  m.head.beta_0 = 0.0;
  return m;
}

namespace {

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void check_model(const TwoStageModel& model, Eigen::Index cols) {
  if (model.featurizer.rows() != model.featurizer.cols() || model.featurizer.cols() != cols ||
      model.p_d() + model.p_s() != model.featurizer.rows())
    throw ConfigError("model dimensions do not match the data");
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
  return out;
}

Eigen::VectorXi gather(const Eigen::VectorXi& y, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(idx[i]);
  return out;
}

}  // namespace

double logistic_loss(const TwoStageModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXi& y) {
  check_model(model, x.cols());
  if (x.rows() == 0) throw DomainError("logistic loss of an empty batch");
  const Eigen::VectorXd s = model.scores(x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) total += softplus(-static_cast<double>(y(i)) * s(i));
  return total / static_cast<double>(s.size());
}

LossAndGradient logistic_loss_and_gradient(const TwoStageModel& model, const Eigen::MatrixXd& x,
                                           const Eigen::VectorXi& y) {
  check_model(model, x.cols());
  if (x.rows() == 0) throw DomainError("logistic loss of an empty batch");
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  const Eigen::MatrixXd features = x * model.featurizer.transpose();
  const Eigen::VectorXd h = model.head.direction();
  const Eigen::VectorXd s = (features * h).array() + model.head.beta_0;

  // r_i = d loss_i / d s_i, already divided by n
  Eigen::VectorXd r(s.size());
  LossAndGradient out;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double yi = static_cast<double>(y(i));
    out.loss += softplus(-yi * s(i));
    r(i) = -yi * sigmoid(-yi * s(i)) * inv_n;
  }
  out.loss *= inv_n;
  out.grad_head = features.transpose() * r;
  out.grad_bias = r.sum();
  out.grad_featurizer = h * (x.transpose() * r).transpose();
  return out;
}

Eigen::VectorXd LossAndGradient::flatten() const {
  Eigen::VectorXd p(grad_featurizer.size() + grad_head.size() + 1);
  p.head(grad_featurizer.size()) = Eigen::Map<const Eigen::VectorXd>(grad_featurizer.data(), grad_featurizer.size());
  p.segment(grad_featurizer.size(), grad_head.size()) = grad_head;
  p(p.size() - 1) = grad_bias;
  return p;
}

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(Eigen::Index n, double val_fraction,
                                                                              std::uint64_t seed) {
  if (!(val_fraction > 0 && val_fraction < 1)) throw ConfigError("val_fraction must lie in (0,1)");
  const auto n_val = static_cast<Eigen::Index>(std::ceil(val_fraction * static_cast<double>(n)));
  if (n_val < 1 || n - n_val < 1) throw ContractError("dataset too small for a train/validation split");

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  CounterRng rng(seed, stream::split, 0);
  for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);

  const auto cut = perm.begin() + (n - n_val);
  return {std::vector<Eigen::Index>(perm.begin(), cut), std::vector<Eigen::Index>(cut, perm.end())};
}

TrainResult train(const TwoStageModel& init, const Data& data, const TrainConfig& cfg, Schedule schedule,
                  const std::optional<SwadConfig>& swad) {
  cfg.validate();
  if (swad) swad->validate();
  check_model(init, data.x.cols());

  auto [train_idx, val_idx] = split_indices(data.size(), cfg.val_fraction, cfg.seed);
  const Eigen::MatrixXd x_train = gather_rows(data.x, train_idx);
  const Eigen::VectorXi y_train = gather(data.y, train_idx);
  const Eigen::MatrixXd x_val = gather_rows(data.x, val_idx);
  const Eigen::VectorXi y_val = gather(data.y, val_idx);

  struct Phase {
    const char* name;
    std::int64_t steps;
    double lr;
    bool head_only;
  };
  std::vector<Phase> phases;
  switch (schedule) {
    case Schedule::erm: phases.push_back({"ft", cfg.lp_iters + cfg.ft_iters, cfg.lr_ft, false}); break;
    case Schedule::lp_only: phases.push_back({"lp", cfg.lp_iters + cfg.ft_iters, cfg.lr_lp, true}); break;
    case Schedule::lp_ft:
      phases.push_back({"lp", cfg.lp_iters, cfg.lr_lp, true});
      phases.push_back({"ft", cfg.ft_iters, cfg.lr_ft, false});
      break;
  }

  TrainResult result;
  result.val_indices = val_idx;
  TwoStageModel model = init;
  std::optional<SwadState> averager;
  if (swad) averager.emplace(*swad);

  const auto n_train = static_cast<std::uint64_t>(train_idx.size());
  Eigen::MatrixXd x_batch;
  Eigen::VectorXi y_batch;
  std::int64_t global = 0;
  for (const Phase& phase : phases) {
    const bool averaging = averager.has_value() && !phase.head_only;
    const std::int64_t interval = averaging ? swad->eval_interval : cfg.log_interval;
    for (std::int64_t k = 0; k < phase.steps; ++k, ++global) {
      LossAndGradient lg;
      if (cfg.minibatch) {
        const auto b = static_cast<Eigen::Index>(*cfg.minibatch);
        x_batch.resize(b, x_train.cols());
        y_batch.resize(b);
        CounterRng rng(cfg.seed, stream::batch, static_cast<std::uint64_t>(global));
        for (Eigen::Index i = 0; i < b; ++i) {
          const auto j = static_cast<Eigen::Index>(rng.below(n_train));
          x_batch.row(i) = x_train.row(j);
          y_batch(i) = y_train(j);
        }
        lg = logistic_loss_and_gradient(model, x_batch, y_batch);
      } else {
        lg = logistic_loss_and_gradient(model, x_train, y_train);
      }
      if (!std::isfinite(lg.loss)) throw TrainingError("training loss became non-finite", global);

      model.head.beta_d -= phase.lr * lg.grad_head.head(model.p_d());
      model.head.beta_s -= phase.lr * lg.grad_head.tail(model.p_s());
      model.head.beta_0 -= phase.lr * lg.grad_bias;
      if (!phase.head_only) model.featurizer -= phase.lr * lg.grad_featurizer;
      if (!model.featurizer.allFinite() || !model.head.direction().allFinite() || !std::isfinite(model.head.beta_0))
        throw TrainingError("parameters became non-finite", global);

      if (averaging) averager->accumulate(k, model.flatten());
      const bool boundary = (k + 1) % interval == 0;
      if (boundary || k + 1 == phase.steps) {
        const double val_loss = logistic_loss(model, x_val, y_val);
        const double train_loss = logistic_loss(model, x_train, y_train);
        if (!std::isfinite(val_loss) || !std::isfinite(train_loss))
          throw TrainingError("loss became non-finite", global);
        if (averaging && boundary) averager->record_loss(k, val_loss);
        result.trace.push_back({global, phase.name, train_loss, val_loss, averaging});
      }
    }
  }

  result.final_iterate = model;
  result.model = model;
  if (averager && !averager->empty()) {
    auto [params, report] = averager->finalize();
    result.model.assign(params);
    result.swad = report;
  }
  return result;
}

double feature_distortion(const TwoStageModel& before, const TwoStageModel& after, const Eigen::MatrixXd& x) {
  if (x.rows() == 0) throw DomainError("feature_distortion of an empty dataset");
  if (before.featurizer.rows() != after.featurizer.rows() || before.featurizer.cols() != after.featurizer.cols() ||
      before.featurizer.cols() != x.cols())
    throw ConfigError("feature_distortion dimension mismatch");
  const Eigen::MatrixXd delta = x * (after.featurizer - before.featurizer).transpose();
  return delta.rowwise().norm().mean();
}

Classifier effective_rule(const TwoStageModel& model, const Mixing& mixing) {
  if (mixing.dim() != model.dim()) throw ConfigError("effective_rule: mixing dimension mismatch");
  const Eigen::VectorXd latent = mixing.matrix.transpose() * (model.featurizer.transpose() * model.head.direction());
  Classifier rule;
  rule.beta_d = latent.head(model.p_d());
  rule.beta_s = latent.tail(model.p_s());
  rule.beta_0 = model.head.beta_0;
  return rule;
}

double silent_share(const TwoStageModel& model, const Mixing& mixing) {
  if (mixing.dim() != model.dim()) throw ConfigError("silent_share: mixing dimension mismatch");
  const Eigen::MatrixXd latent_map = model.featurizer * mixing.matrix;
  const double total = latent_map.squaredNorm();
  if (total == 0.0) return 0.0;
  return latent_map.rightCols(model.p_s()).squaredNorm() / total;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double denom = a.norm() * b.norm();
  if (denom == 0.0) return 0.0;
  return a.dot(b) / denom;
}

}  // namespace silent
