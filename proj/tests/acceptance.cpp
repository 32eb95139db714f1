// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//
//   acceptance [--cli <path to silentlab>] [--jobs N]
//
// With --cli the determinism check runs the command-line tool twice in
// separate processes; otherwise it compares two in-process runs.
#include "silent/harness.hpp"
#include "oracles.hpp"
#include "stats.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>

#include <unistd.h>

using namespace silent;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<Outcome()> run;
};

unsigned g_jobs = std::max(1u, std::thread::hardware_concurrency());
std::string g_cli;

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

DomainSpec make_spec(Eigen::VectorXd mu_d, Eigen::VectorXd mu_s, double gamma = 1.0) {
  DomainSpec s;
  s.mu_d = std::move(mu_d);
  s.mu_s = std::move(mu_s);
  s.gamma = gamma;
  return s;
}

// 1. Normal CDF against an independent long-double series on x = -8..8 step 0.5.
Outcome cdf_accuracy() {
  double worst = 0;
  for (int k = -16; k <= 16; ++k) {
    const double x = 0.5 * k;
    worst = std::max(worst, std::abs(std_normal_cdf(x) - static_cast<double>(oracle::normal_cdf(x))));
  }
  // The series itself must agree with the frozen high-precision table.
  double oracle_drift = 0;
  for (const auto& [x, f] : oracle::kFrozenLowerTail)
    oracle_drift = std::max(oracle_drift, static_cast<double>(std::abs(oracle::normal_cdf(x) - f)));
  return {worst <= 1e-10 && oracle_drift <= 1e-15,
          "max |F - oracle| = " + fmt(worst, 3) + " over 33 points (oracle vs table " + fmt(oracle_drift, 3) + ")"};
}

// 2. bayes_risk equals linear_classifier_risk at the Bayes rule on 100 random draws.
Outcome closed_form_consistency() {
  CounterRng rng(2024, stream::test, 2);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const auto p_d = 1 + static_cast<Eigen::Index>(rng.below(4));
    const auto p_s = 1 + static_cast<Eigen::Index>(rng.below(4));
    DomainSpec s;
    s.mu_d.resize(p_d);
    s.mu_s.resize(p_s);
    for (auto& v : s.mu_d) v = rng.normal();
    for (auto& v : s.mu_s) v = 0.7 * rng.normal();
    s.sigma_d = 0.3 + 2 * rng.uniform();
    s.sigma_s = 0.3 + 2 * rng.uniform();
    s.eta = 0.05 + 0.9 * rng.uniform();
    s.gamma = -3 + 8 * rng.uniform();
    const Weights w{rng.uniform(), rng.uniform()};
    const auto beta = bayes_classifier(s, w);
    for (Domain d : {Domain::train, Domain::test})
      worst = std::max(worst, std::abs(bayes_risk(s, w, d) - linear_classifier_risk(s, w, beta, d)));
  }
  return {worst <= 1e-12, "max |difference| = " + fmt(worst, 3) + " over 100 draws x 2 domains"};
}

// 3. Monte Carlo vs closed form on 20 random points, n = 1e6 each.
Outcome mc_vs_closed_form() {
  const auto rows = run_mc_check(20, 1000000, 0, g_jobs);
  std::size_t pass = 0;
  double worst_z = 0;
  for (const auto& r : rows) {
    pass += r.pass ? 1 : 0;
    worst_z = std::max(worst_z, std::abs(r.z));
  }
  return {pass >= 19, std::to_string(pass) + "/20 within 4 stderr (max |z| = " + fmt(worst_z, 3) + ")"};
}

// 4. Bayes-risk landscape over suppression weights.
Outcome risk_landscape() {
  std::vector<std::string> failures;
  const DomainSpec base = make_spec(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0.5));
  const DomainSpec weak = make_spec(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0.1));

  for (const DomainSpec& s : {base, weak}) {
    const auto rev = test_spec(s, -1.0);
    std::size_t arg = 0;
    double best = 2;
    for (int i = 0; i <= 10; ++i) {
      const double r = bayes_risk(rev, Weights{1, 0.1 * i}, Domain::test);
      if (r < best) best = r, arg = static_cast<std::size_t>(i);
    }
    if (arg != 0) failures.push_back("(a) argmin w_s = " + fmt(0.1 * static_cast<double>(arg)));
  }

  const auto shifted = test_spec(base, 4.0);
  const double r11 = bayes_risk(shifted, Weights{1, 1}, Domain::test);
  const double r10 = bayes_risk(shifted, Weights{1, 0}, Domain::test);
  if (std::abs(r11 - 0.036819) > 1e-6 || std::abs(r10 - 0.158655) > 1e-6 || !(r11 < r10))
    failures.push_back("(b) R(1,1) = " + fmt(r11, 8) + ", R(1,0) = " + fmt(r10, 8));

  for (const DomainSpec& s : {base, weak})
    for (int i = 0; i <= 20; ++i) {
      const Weights w{1, 0.05 * i};
      if (bayes_risk(s, w, Domain::train) != bayes_risk(test_spec(s, 1.0), w, Domain::test))
        failures.push_back("(c) train != test at w_s = " + fmt(w.w_s));
    }

  for (double gamma : {1.0, 2.0, 4.0})
    for (const DomainSpec& s : {base, weak}) {
      const auto t = test_spec(s, gamma);
      double prev = bayes_risk(t, Weights{1, 0}, Domain::test);
      for (int i = 1; i <= 20; ++i) {
        const double r = bayes_risk(t, Weights{1, 0.05 * i}, Domain::test);
        if (r > prev) failures.push_back("(d) increase at gamma = " + fmt(gamma) + ", w_s = " + fmt(0.05 * i));
        prev = r;
      }
    }

  std::string detail = "R(1,1) = " + fmt(r11, 8) + " < R(1,0) = " + fmt(r10, 8);
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

// 5. Suppression channel moments at n = 1e5 for w in {0, 0.3, 0.6, 1}.
Outcome suppression_channel() {
  DomainSpec s = make_spec(Eigen::Vector2d(1.0, -0.5), Eigen::Vector2d(0.5, 0.25));
  s.sigma_d = 1.0;
  s.sigma_s = 0.8;
  const Mixing mixing = Mixing::orthogonal(4, 5);
  const Data data = sample_domain(s, mixing, 100000, 55);
  std::vector<std::string> failures;
  int checks = 0;
  for (double w : {0.0, 0.3, 0.6, 1.0}) {
    const auto phi = suppressed_featurizer(mixing, Weights{w, w}, s, derive_seed(56, static_cast<std::uint64_t>(w * 10)));
    const Eigen::MatrixXd z = phi.transform(data.x);
    for (int label : {1, -1})
      for (Eigen::Index j = 0; j < 4; ++j) {
        teststats::Moments m;
        for (Eigen::Index i = 0; i < data.size(); ++i)
          if (data.y(i) == label) m.add(z(i, j));
        const double mu = j < 2 ? s.mu_d(j) : s.mu_s(j - 2);
        const double sigma = j < 2 ? s.sigma_d : s.sigma_s;
        checks += 2;
        if (!teststats::mean_within(m, label * w * mu, sigma, 5.0))
          failures.push_back("mean w=" + fmt(w) + " coord " + std::to_string(j));
        if (!teststats::variance_within(m, sigma, 5.0))
          failures.push_back("variance w=" + fmt(w) + " coord " + std::to_string(j));
      }
  }
  std::string detail = std::to_string(checks - static_cast<int>(failures.size())) + "/" + std::to_string(checks) +
                       " conditional moments inside 5-sigma bands";
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

// 6. ERM recovers the Bayes direction; analytic gradients match finite differences.
Outcome trainer_consistency() {
  const DomainSpec s = make_spec(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0.5));
  const Mixing mixing = Mixing::identity(4);
  const Data data = sample_domain(s, mixing, 50000, 66);
  TrainConfig tc;
  tc.lr_ft = 0.1;
  tc.lp_iters = 0;
  tc.ft_iters = 2000;
  tc.seed = 67;
  const auto result = train(init_pretrained(mixing, 2, PretrainKind::oracle_silent(), 0), data, tc, Schedule::erm);
  const double cosine = cosine_similarity(effective_rule(result.model, mixing).direction(),
                                          bayes_classifier(s, Weights{1, 1}).direction());

  CounterRng rng(68, stream::test, 0);
  double worst = 0;
  for (int trial = 0; trial < 5; ++trial) {
    TwoStageModel m = init_pretrained(Mixing::orthogonal(4, 69 + trial), 2, PretrainKind::noisy_oracle(0.3), 70 + trial);
    for (auto& v : m.head.beta_d) v = rng.normal();
    for (auto& v : m.head.beta_s) v = rng.normal();
    m.head.beta_0 = rng.normal();
    const Data batch = sample_domain(s, Mixing::identity(4), 64, 71 + trial);
    const Eigen::VectorXd grad = logistic_loss_and_gradient(m, batch.x, batch.y).flatten();
    const Eigen::VectorXd p = m.flatten();
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      TwoStageModel plus = m, minus = m;
      Eigen::VectorXd pp = p, pm = p;
      pp(k) += 1e-5;
      pm(k) -= 1e-5;
      plus.assign(pp);
      minus.assign(pm);
      const double fd = (logistic_loss(plus, batch.x, batch.y) - logistic_loss(minus, batch.x, batch.y)) / 2e-5;
      worst = std::max(worst, std::abs(fd - grad(k)) / std::max(1.0, std::abs(grad(k))));
    }
  }
  return {cosine >= 0.99 && worst <= 1e-6,
          "cosine = " + fmt(cosine, 8) + ", max relative gradient error = " + fmt(worst, 3)};
}

// 7. LP-FT moves features less than ERM and suppresses the silent block less.
Outcome lp_ft_preservation() {
  ExperimentConfig cfg;  // |mu_s| = 0.1 scenario
  cfg.scenario = "preservation";
  cfg.gammas = {1.0};
  cfg.arms = {Arm::erm, Arm::lp_ft};
  cfg.pretrain = {PretrainKind::oracle_silent()};
  cfg.seeds.clear();
  for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(s);
  cfg.mc_samples = 1000;
  const auto result = run_training_experiment(cfg, g_jobs);

  const double init_share = silent_share(init_pretrained(cfg.mixing(), cfg.train.p_d(), PretrainKind::oracle_silent(), 0),
                                         cfg.mixing());
  int distortion_wins = 0, drop_wins = 0;
  double dist_erm = 0, dist_lpft = 0, drop_erm = 0, drop_lpft = 0;
  for (std::uint64_t seed : cfg.seeds) {
    const ResultRow* erm = nullptr;
    const ResultRow* lpft = nullptr;
    for (const auto& r : result.rows)
      if (r.seed == seed) (r.arm == "erm" ? erm : lpft) = &r;
    if (!erm || !lpft || erm->status != "ok" || lpft->status != "ok") continue;
    distortion_wins += lpft->feature_distortion < erm->feature_distortion;
    drop_wins += (init_share - lpft->silent_share) < (init_share - erm->silent_share);
    dist_erm += erm->feature_distortion / 10;
    dist_lpft += lpft->feature_distortion / 10;
    drop_erm += (init_share - erm->silent_share) / 10;
    drop_lpft += (init_share - lpft->silent_share) / 10;
  }
  return {distortion_wins >= 8 && drop_wins >= 8,
          "distortion lp_ft < erm in " + std::to_string(distortion_wins) + "/10 (means " + fmt(dist_lpft, 4) + " vs " +
              fmt(dist_erm, 4) + "); silent-share drop smaller in " + std::to_string(drop_wins) + "/10 (means " +
              fmt(drop_lpft, 4) + " vs " + fmt(drop_erm, 4) + ")"};
}

// 8. SWAD schedule, exact averaging, and the noisy-minibatch benefit.
Outcome swad_checks() {
  std::vector<std::string> failures;
  SwadConfig sc;
  const std::vector<double> losses{0.9, 0.7, 0.75, 0.72, 0.9};
  const auto w = schedule(losses, sc);
  if (w.t_s != 1 || w.t_e != 4) failures.push_back("(a) got (" + std::to_string(w.t_s) + ", " + std::to_string(w.t_e) + ")");

  CounterRng rng(80, stream::test, 0);
  SwadState state(sc);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(9);
  for (int i = 0; i < 300; ++i) {
    Eigen::VectorXd v(9);
    for (auto& x : v) x = 5 * rng.normal();
    sum += v;
    state.accumulate(i, v);
  }
  const double mean_err = (state.finalize().first - sum / 300).cwiseAbs().maxCoeff();
  if (mean_err > 1e-12) failures.push_back("(b) mean error " + fmt(mean_err, 3));

  // Same training seed for both arms, so the lp_ft model is the SWAD run's final iterate.
  ExperimentConfig cfg;
  cfg.scenario = "swad";
  cfg.gammas = {4.0};
  cfg.arms = {Arm::lp_ft, Arm::lp_ft_swad};
  cfg.pretrain = {PretrainKind::oracle_silent()};
  cfg.lr_lp = {0.5};
  cfg.lr_ft = {0.1};
  cfg.lp_iters = {200};
  cfg.ft_iters = {500};
  cfg.minibatch = 32;
  cfg.n_train = 2000;
  cfg.mc_samples = 1000;
  cfg.seeds.clear();
  for (std::uint64_t s = 0; s < 20; ++s) cfg.seeds.push_back(s);
  const auto result = run_training_experiment(cfg, g_jobs);
  double swad = 0, last = 0;
  int n_swad = 0, n_last = 0;
  for (const auto& r : result.rows) {
    if (r.status != "ok") continue;
    if (r.arm == "lp_ft_swad") swad += r.exact_test_risk, ++n_swad;
    else last += r.exact_test_risk, ++n_last;
  }
  swad /= std::max(1, n_swad);
  last /= std::max(1, n_last);
  if (n_swad != 20 || n_last != 20 || !(swad <= last + 0.002))
    failures.push_back("(c) swad " + fmt(swad, 6) + " vs final " + fmt(last, 6));

  std::string detail = "window (" + std::to_string(w.t_s) + ", " + std::to_string(w.t_e) + "), mean error " +
                       fmt(mean_err, 3) + ", test risk swad " + fmt(swad, 6) + " vs final iterate " + fmt(last, 6) +
                       " over 20 seeds";
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

// 9. Linear probing: the silent backbone wins under shift; no shift leaves a reversal or a tie.
Outcome lp_only_ordering() {
  ExperimentConfig cfg;  // three fixed seeds
  cfg.scenario = "lp_only";
  cfg.gammas = {1.0, 4.0};
  cfg.arms = {Arm::lp_only};
  const auto result = run_training_experiment(cfg, g_jobs);

  // Mean MC risk over seeds and the standard error of that mean.
  struct Stat {
    double mean = 0, var = 0;
    double exact = 0;
    int n = 0;
  };
  std::map<std::pair<std::string, double>, Stat> stats;
  for (const auto& r : result.rows) {
    if (r.status != "ok") continue;
    auto& s = stats[{r.pretrain, r.gamma}];
    s.mean += r.test_risk;
    s.var += r.test_stderr * r.test_stderr;
    s.exact += r.exact_test_risk;
    ++s.n;
  }
  for (auto& [key, s] : stats) {
    s.mean /= s.n;
    s.exact /= s.n;
    s.var /= static_cast<double>(s.n) * s.n;
  }
  const auto& s4 = stats[{"oracle_silent", 4.0}];
  const auto& d4 = stats[{"oracle_dominant", 4.0}];
  const auto& s1 = stats[{"oracle_silent", 1.0}];
  const auto& d1 = stats[{"oracle_dominant", 1.0}];
  const double tie_band = 4.0 * std::sqrt(s1.var + d1.var);
  const bool shifted = s4.mean < d4.mean;
  const bool unshifted = s1.mean >= d1.mean - tie_band;
  return {shifted && unshifted && s4.n == 3 && d1.n == 3,
          "gamma=4: silent " + fmt(s4.mean, 5) + " < dominant " + fmt(d4.mean, 5) + (shifted ? "" : " FAILED") +
              "; gamma=1: silent " + fmt(s1.mean, 5) + " vs dominant " + fmt(d1.mean, 5) + " (tie band " +
              fmt(tie_band, 3) + ", exact " + fmt(s1.exact, 5) + " vs " + fmt(d1.exact, 5) + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 10. Two identical experiment runs give identical bytes.
Outcome determinism() {
  if (!g_cli.empty()) {
    const fs::path root = fs::temp_directory_path() / ("silentlab_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    bool ok = true;
    for (const char* run : {"a", "b"}) {
      const std::string cmd = "\"" + g_cli + "\" --out \"" + (root / run).string() + "\" --jobs " +
                              std::to_string(std::string(run) == "a" ? 1u : g_jobs) + " experiment";
      ok &= std::system(cmd.c_str()) == 0;
    }
    std::string compared;
    for (const char* f : {"results.csv", "aggregate.csv", "experiment.json"}) {
      const std::string a = slurp(root / "a" / f), b = slurp(root / "b" / f);
      ok &= !a.empty() && a == b;
      compared += std::string(compared.empty() ? "" : ", ") + f + " (" + std::to_string(a.size()) + " B)";
    }
    fs::remove_all(root);
    return {ok, "CLI `experiment` twice (jobs 1 and " + std::to_string(g_jobs) + "): identical " + compared};
  }
  const ExperimentConfig cfg;
  auto bytes = [&](unsigned jobs) {
    const auto r = run_training_experiment(cfg, jobs);
    std::ostringstream out;
    write_results_csv(out, r.rows);
    write_aggregate_csv(out, r.aggregates);
    out << experiment_metadata(cfg, r).dump(2);
    return out.str();
  };
  const std::string a = bytes(1), b = bytes(g_jobs);
  return {a == b, "in-process experiment twice: " + std::to_string(a.size()) + " bytes, identical = " +
                      (a == b ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) g_cli = argv[++i];
    else if (arg == "--jobs" && i + 1 < argc) g_jobs = static_cast<unsigned>(std::max(1, std::atoi(argv[++i])));
  }

  const std::vector<Criterion> criteria{
      {1, "cdf-accuracy", 1, cdf_accuracy},
      {2, "closed-form-self-consistency", 1, closed_form_consistency},
      {3, "mc-vs-closed-form", 60, mc_vs_closed_form},
      {4, "bayes-risk-landscape", 1, risk_landscape},
      {5, "suppression-channel", 5, suppression_channel},
      {6, "trainer-consistency", 30, trainer_consistency},
      {7, "lp-ft-preservation", 120, lp_ft_preservation},
      {8, "swad", 180, swad_checks},
      {9, "lp-only-ordering", 60, lp_only_ordering},
      {10, "determinism", 60, determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.time_limit_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s %2d %-30s %s [%.2f s / %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                secs, c.time_limit_s, in_time ? "" : " exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
