#include "silent/harness.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace silent;

namespace {

ExperimentConfig small_experiment() {
  ExperimentConfig c;
  c.scenario = "small";
  c.gammas = {1, 4};
  c.lr_lp = {0.5};
  c.lr_ft = {0.05, 0.1};
  c.lp_iters = {20};
  c.ft_iters = {30};
  c.n_train = 500;
  c.mc_samples = 2000;
  c.seeds = {0, 1};
  return c;
}

std::string results_bytes(const ExperimentResult& r) {
  std::ostringstream out;
  write_results_csv(out, r.rows);
  write_aggregate_csv(out, r.aggregates);
  return out.str();
}

ResultRow row(std::size_t config, std::uint64_t seed, double gamma, double val, double test) {
  ResultRow r;
  r.scenario = "fixture";
  r.config_id = config;
  r.seed = seed;
  r.gamma = gamma;
  r.arm = "lp_ft";
  r.pretrain = "oracle_silent";
  r.val_risk = val;
  r.test_risk = test;
  return r;
}

}  // namespace

TEST(Sweep, ClosedFormGrid) {
  ExperimentConfig c;
  c.train.mu_d = Eigen::VectorXd::Ones(1);
  c.train.mu_s = Eigen::VectorXd::Constant(1, 0.5);
  c.mc_samples = 0;
  const auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 44u);
  for (const auto& r : rows) EXPECT_EQ(r.report.method, RiskReport<double>::Method::closed_form);
  const auto at = [&](double w_s, double gamma) {
    for (const auto& r : rows)
      if (std::abs(r.report.weights.w_s - w_s) < 1e-12 && r.report.gamma == gamma) return r.report.test_risk;
    return -1.0;
  };
  EXPECT_NEAR(at(1.0, 4.0), 0.036819, 1e-6);
  EXPECT_NEAR(at(0.0, 4.0), 0.158655, 1e-6);
}

TEST(Sweep, MonteCarloRowsFollowClosedForm) {
  ExperimentConfig c;
  c.w_s_grid = {0.0, 1.0};
  c.gammas = {4.0};
  c.mc_samples = 20000;
  const auto rows = run_sweep(c, 3);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].report.method, RiskReport<double>::Method::closed_form);
  EXPECT_EQ(rows[1].report.method, RiskReport<double>::Method::monte_carlo);
  EXPECT_EQ(rows[1].n, 20000);
  for (std::size_t i = 0; i < rows.size(); i += 2)
    EXPECT_NEAR(rows[i + 1].report.test_risk, rows[i].report.test_risk, 4 * rows[i + 1].std_error + 1e-12);

  std::ostringstream a, b;
  write_sweep_csv(a, rows);
  write_sweep_csv(b, run_sweep(c, 1));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "w_d,w_s,gamma,method,train_risk,test_risk,stderr,n");
}

TEST(McCheck, DeterministicAndMostlyPassing) {
  const auto a = run_mc_check(6, 50000, 3, 2);
  const auto b = run_mc_check(6, 50000, 3, 4);
  ASSERT_EQ(a.size(), 6u);
  std::size_t pass = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].estimate.mean, b[i].estimate.mean);
    pass += a[i].pass;
  }
  EXPECT_GE(pass, 5u);
}

TEST(McCheck, PointsVaryAcrossTheFamily) {
  bool any_test = false, any_train = false, any_orth = false;
  for (std::uint64_t i = 0; i < 12; ++i) {
    const auto p = random_check_point(1, i);
    EXPECT_EQ(p.spec.dim(), p.mixing.dim());
    any_test |= p.domain == Domain::test;
    any_train |= p.domain == Domain::train;
    any_orth |= p.mixing.kind == MixingKind::orthogonal;
  }
  EXPECT_TRUE(any_test && any_train && any_orth);
}

TEST(Experiment, RowCountsAndOrder) {
  const auto c = small_experiment();
  const auto r = run_training_experiment(c, 3);
  const std::size_t expected = 2 /*configs*/ * 4 /*arms*/ * 2 /*pretrain*/ * 2 /*seeds*/ * 2 /*gammas*/;
  EXPECT_EQ(r.expected_rows, expected);
  ASSERT_EQ(r.rows.size(), expected);
  EXPECT_EQ(r.aggregates.size(), expected / 2);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const auto& a = r.rows[i - 1];
    const auto& b = r.rows[i];
    EXPECT_LE(a.config_id, b.config_id);
  }
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.status, "ok");
    EXPECT_GE(row.test_risk, 0.0);
    EXPECT_LE(row.test_risk, 1.0);
    if (row.arm == "lp_only") {
      EXPECT_EQ(row.feature_distortion, 0.0);
    }
    if (row.arm == "lp_ft_swad") {
      EXPECT_TRUE(row.swad.has_value());
    }
  }
  for (const auto& a : r.aggregates) EXPECT_EQ(a.n_seeds, 2u);
}

TEST(Experiment, AggregateIsMeanAndSampleStd) {
  const auto r = run_training_experiment(small_experiment(), 2);
  const auto& agg = r.aggregates.front();
  std::vector<double> v;
  for (const auto& row : r.rows)
    if (row.config_id == agg.config_id && row.arm == agg.arm && row.pretrain == agg.pretrain && row.gamma == agg.gamma)
      v.push_back(row.test_risk);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_DOUBLE_EQ(agg.test_risk_mean, (v[0] + v[1]) / 2);
  EXPECT_NEAR(agg.test_risk_std, std::abs(v[0] - v[1]) / std::sqrt(2.0), 1e-15);
}

TEST(Experiment, ByteIdenticalAcrossRunsAndJobs) {
  const auto c = small_experiment();
  const auto a = run_training_experiment(c, 1);
  const auto b = run_training_experiment(c, 4);
  EXPECT_EQ(results_bytes(a), results_bytes(b));
  EXPECT_EQ(experiment_metadata(c, a).dump(), experiment_metadata(c, b).dump());
}

TEST(Experiment, DivergedRunsAreFlaggedNotFatal) {
  auto c = small_experiment();
  c.lr_ft = {1e200};
  c.arms = {Arm::erm};
  const auto r = run_training_experiment(c, 2);
  ASSERT_FALSE(r.rows.empty());
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.status, "diverged");
    EXPECT_TRUE(std::isnan(row.test_risk));
  }
  EXPECT_FALSE(experiment_metadata(c, r)["failures"].empty());
}

TEST(Experiment, ResultsCsvRoundTrip) {
  const auto r = run_training_experiment(small_experiment(), 2);
  std::stringstream io;
  write_results_csv(io, r.rows);
  const auto back = read_results_csv(io);
  std::ostringstream again;
  write_results_csv(again, back);
  EXPECT_EQ(again.str(), io.str());
}

TEST(GridSelect, SingleConfig) {
  const std::vector<ResultRow> rows{row(0, 1, 1, 0.2, 0.3), row(0, 2, 1, 0.1, 0.4)};
  EXPECT_EQ(grid_select(rows, SelectionCriterion::train_val).config_id, 0u);
}

TEST(GridSelect, TieGoesToLowestId) {
  const std::vector<ResultRow> rows{row(0, 1, 1, 0.2, 0.3), row(1, 1, 1, 0.2, 0.3), row(2, 1, 1, 0.2, 0.3)};
  EXPECT_EQ(grid_select(rows, SelectionCriterion::train_val).config_id, 0u);
  EXPECT_EQ(grid_select(rows, SelectionCriterion::test_val).config_id, 0u);
}

TEST(GridSelect, StrictlyBestUnderBothCriteria) {
  std::vector<ResultRow> rows;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::uint64_t s : {0ULL, 1ULL})
      for (double g : {1.0, 4.0}) rows.push_back(row(c, s, g, c == 1 ? 0.1 : 0.3, c == 1 ? 0.15 : 0.35));
  EXPECT_EQ(grid_select(rows, SelectionCriterion::train_val).config_id, 1u);
  EXPECT_EQ(grid_select(rows, SelectionCriterion::test_val).config_id, 1u);
}

TEST(GridSelect, PerCellModelSelectionUsesValidation) {
  // Two candidates (arms) per cell: the selected one has the lower val risk.
  std::vector<ResultRow> rows{row(0, 0, 4, 0.30, 0.10), row(0, 0, 4, 0.20, 0.50), row(1, 0, 4, 0.25, 0.30)};
  rows[1].arm = "erm";
  const auto sel = grid_select(rows, SelectionCriterion::test_val);
  EXPECT_DOUBLE_EQ(sel.scores[0], 0.50);
  EXPECT_EQ(sel.config_id, 1u);
}

TEST(GridSelect, IncompleteGridListsMissingCells) {
  const std::vector<ResultRow> rows{row(0, 1, 1, 0.2, 0.3), row(0, 2, 1, 0.2, 0.3), row(1, 1, 1, 0.2, 0.3)};
  try {
    grid_select(rows, SelectionCriterion::train_val);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("config=1 seed=2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(grid_select({}, SelectionCriterion::train_val), ProtocolError);
  EXPECT_THROW(parse_criterion("oracle"), ConfigError);
}

TEST(Fig3, SilentBackboneLeansOnShape) {
  auto c = fig3_default_config();
  c.n_train = 800;
  c.mc_samples = 1000;
  const auto demo = demo_fig3(c);
  ASSERT_EQ(demo.lines.size(), 4u);
  const auto find = [&](const std::string& name) {
    for (const auto& l : demo.lines)
      if (l.name == name) return l;
    ADD_FAILURE() << name;
    return demo.lines.front();
  };
  EXPECT_GT(find("lp_oracle_silent").silent_component(), find("lp_oracle_dominant").silent_component());
  EXPECT_EQ(find("lp_oracle_dominant").silent_component(), 0.0);
  EXPECT_EQ(find("bayes_w10").silent_component(), 0.0);
  std::ostringstream data, lines;
  write_fig3_data_csv(data, demo);
  write_fig3_lines_csv(lines, demo);
  EXPECT_EQ(data.str().substr(0, data.str().find('\n')), "split,y,texture,shape");
}
