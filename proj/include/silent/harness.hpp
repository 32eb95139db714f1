#pragma once

#include "silent/config.hpp"
#include "silent/monte_carlo.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace silent {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// risk sweep

/// One (w_d, w_s, gamma) grid point, closed form or Monte Carlo.
struct SweepRow {
  std::size_t config_id = 0;  // index into the weight grid
  RiskReport<double> report;
  double std_error = 0;        // monte_carlo only
  std::int64_t n = 0;          // monte_carlo only
  std::uint64_t seed = 0;
  std::string status = "ok";
};

/// Closed-form train/test Bayes risk for every weight x gamma point, followed
/// per point by a Monte-Carlo row when cfg.mc_samples > 0. Rows are ordered by
/// (config id, gamma, method).
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, unsigned jobs = 1);

/// Header `w_d,w_s,gamma,method,train_risk,test_risk,stderr,n`.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// ---------------------------------------------------------------------------
// Monte-Carlo vs closed-form check on random parameters

struct CheckPoint {
  DomainSpec spec;  // gamma is the test-domain gamma
  Weights weights;
  Classifier beta;
  Domain domain = Domain::test;
  Mixing mixing;
};

/// Deterministic random instance `index` of the cross-check family: mixed
/// dimensions, priors, variances, gammas, mixing kinds, Bayes and arbitrary
/// classifiers, both domains.
CheckPoint random_check_point(std::uint64_t seed, std::uint64_t index);

struct CheckRow {
  std::size_t index = 0;
  double closed_form = 0;
  RiskEstimate estimate;
  double z = 0;
  bool pass = false;  // |difference| <= 4 stderr
};

std::vector<CheckRow> run_mc_check(std::size_t points, std::int64_t n, std::uint64_t seed, unsigned jobs = 1);
void write_check_csv(std::ostream& out, const std::vector<CheckRow>& rows);

// ---------------------------------------------------------------------------
// training experiments

struct ResultRow {
  std::string scenario;
  std::uint64_t seed = 0;
  std::size_t config_id = 0;
  std::string arm;
  std::string pretrain;
  double gamma = 1;
  std::string method = "monte_carlo";
  double val_risk = 0;          // 0-1 risk on the training-domain validation split
  double test_risk = 0;         // Monte-Carlo risk on the gamma test domain
  double test_stderr = 0;
  std::int64_t n = 0;
  double exact_test_risk = 0;   // closed-form risk of the effective rule
  double feature_distortion = 0;
  double silent_share = 0;
  double rule_silent_norm = 0;
  std::optional<SwadReport> swad;
  std::string status = "ok";
  double wall_ms = 0;           // not serialized into the results CSV
};

struct AggregateRow {
  std::string scenario;
  std::size_t config_id = 0;
  std::string arm;
  std::string pretrain;
  double gamma = 1;
  std::size_t n_seeds = 0;
  double test_risk_mean = 0;
  double test_risk_std = 0;
  double exact_test_risk_mean = 0;
  double val_risk_mean = 0;
  double feature_distortion_mean = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<AggregateRow> aggregates;
  std::size_t expected_rows = 0;
};

/// Every (train config, arm, pretrain kind, seed) combination is trained on
/// its seed's training set and evaluated on every gamma test domain. Rows are
/// ordered by (config id, arm, pretrain, seed, gamma) regardless of `jobs`;
/// aggregates hold mean and sample std over seeds.
ExperimentResult run_training_experiment(const ExperimentConfig& cfg, unsigned jobs = 1);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
void write_timing_csv(std::ostream& out, const std::vector<ResultRow>& rows);

nlohmann::json experiment_metadata(const ExperimentConfig& cfg, const ExperimentResult& result);

// ---------------------------------------------------------------------------
// grid selection

enum class SelectionCriterion { train_val, test_val };
SelectionCriterion parse_criterion(const std::string& s);

struct GridSelection {
  std::size_t config_id = 0;
  std::vector<double> scores;  // per config id; lower is better
};

/// Two-level selection. Within each (config, seed, gamma) cell the candidate
/// with the lowest validation risk is the selected model; a config's score is
/// the mean over its cells of the selected models' validation risk
/// (train_val) or test risk (test_val). Lowest score wins, ties go to the
/// lowest config id. Throws ProtocolError listing missing cells.
GridSelection grid_select(const std::vector<ResultRow>& rows, SelectionCriterion criterion);

// ---------------------------------------------------------------------------
// two-feature demo (dominant "texture" vs silent "shape")

struct DecisionLine {
  std::string name;
  Classifier rule;  // on the latent (z_d, z_s)
  double silent_component() const;  // |beta_s| / |(beta_d, beta_s)|
};

struct Fig3Demo {
  Data train;
  Data test;
  std::vector<DecisionLine> lines;
};

ExperimentConfig fig3_default_config();

/// Needs p_d = p_s = 1. Lines: Bayes rules for (1,1) and (1,0), and linear
/// probes on the oracle_silent and oracle_dominant backbones.
Fig3Demo demo_fig3(const ExperimentConfig& cfg);

void write_fig3_data_csv(std::ostream& out, const Fig3Demo& demo);
void write_fig3_lines_csv(std::ostream& out, const Fig3Demo& demo);

}  // namespace silent
