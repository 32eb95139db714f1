#pragma once

#include "silent/domain_model.hpp"
#include "silent/suppression.hpp"
#include "silent/swad.hpp"
#include "silent/trainer.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace silent {

inline constexpr const char* kConfigSchema = "silentlab-config/1";

/// Training arm of an experiment: a schedule, optionally with weight averaging.
enum class Arm { erm, lp_only, lp_ft, lp_ft_swad };

const char* to_string(Arm a);
Arm parse_arm(const std::string& s);
Schedule schedule_of(Arm a);
inline bool uses_swad(Arm a) { return a == Arm::lp_ft_swad; }

struct ExperimentConfig {
  std::string scenario = "default";

  DomainSpec train = default_train_spec();
  MixingKind mixing_kind = MixingKind::identity;
  std::uint64_t mixing_seed = 0;

  std::vector<double> gammas{-1.0, 0.5, 1.0, 4.0};
  std::vector<double> w_d_grid{1.0};
  std::vector<double> w_s_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

  // Training grid: learning rates form a cartesian product, iteration counts
  // are paired position by position (lp_iters[k] with ft_iters[k]).
  std::vector<double> lr_lp{0.5};
  std::vector<double> lr_ft{0.05};
  std::vector<std::int64_t> lp_iters{200};
  std::vector<std::int64_t> ft_iters{200};
  double val_fraction = 0.2;
  std::int64_t minibatch = 0;  // 0 = full batch
  std::int64_t n_train = 5000;
  std::int64_t log_interval = 10;
  SwadConfig swad{};
  std::vector<Arm> arms{Arm::erm, Arm::lp_only, Arm::lp_ft, Arm::lp_ft_swad};
  std::vector<PretrainKind> pretrain{PretrainKind::oracle_silent(), PretrainKind::oracle_dominant()};

  std::int64_t mc_samples = 100000;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds{0, 1, 2};

  static DomainSpec default_train_spec();

  Mixing mixing() const;
  std::vector<Weights> weight_grid() const;
  /// Config id k is the k-th entry; `seed` is left at 0 and derived per run.
  std::vector<TrainConfig> train_grid() const;
  void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// Writes a complete, commented config that parse_config reads back.
void write_config(std::ostream& out, const ExperimentConfig& cfg);

/// Key-value block for one domain spec (used for dataset sidecars).
void write_domain_block(std::ostream& out, const DomainSpec& spec, MixingKind kind, std::uint64_t mixing_seed);

std::vector<double> parse_real_list(const std::string& s);

}  // namespace silent
