#include "silent/harness.hpp"

#include "silent/csv.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

namespace silent {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kCheckStream = 0x636865636b;  // "check"

}  // namespace

// ---------------------------------------------------------------------------
// risk sweep

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, unsigned jobs) {
  cfg.validate();
  const auto weights = cfg.weight_grid();
  const Mixing mixing = cfg.mixing();
  const bool with_mc = cfg.mc_samples > 0;
  const std::size_t per_point = with_mc ? 2 : 1;

  std::vector<SweepRow> rows(weights.size() * cfg.gammas.size() * per_point);
  parallel_for(weights.size() * cfg.gammas.size(), jobs, [&](std::size_t task) {
    const std::size_t wi = task / cfg.gammas.size();
    const std::size_t gi = task % cfg.gammas.size();
    const DomainSpec spec = test_spec(cfg.train, cfg.gammas[gi]);
    SweepRow& closed = rows[task * per_point];
    closed.config_id = wi;
    try {
      closed.report = bayes_risk_report(spec, weights[wi]);
    } catch (const Error& e) {
      closed.report.weights = weights[wi];
      closed.report.gamma = spec.gamma;
      closed.report.train_risk = closed.report.test_risk = kNaN;
      closed.status = std::string("error: ") + e.what();
    }
    if (!with_mc) return;

    SweepRow& mc = rows[task * per_point + 1];
    mc.config_id = wi;
    mc.report.weights = weights[wi];
    mc.report.gamma = spec.gamma;
    mc.report.method = RiskReport<double>::Method::monte_carlo;
    mc.seed = derive_seed(cfg.master_seed, wi, gi);
    try {
      const Classifier beta = bayes_classifier(spec, weights[wi]);
      const auto train = mc_risk(spec, weights[wi], beta, Domain::train, mixing, cfg.mc_samples, mc.seed);
      const auto test = mc_risk(spec, weights[wi], beta, Domain::test, mixing, cfg.mc_samples, mc.seed);
      mc.report.train_risk = train.mean;
      mc.report.test_risk = test.mean;
      mc.std_error = test.std_error;
      mc.n = test.n;
    } catch (const Error& e) {
      mc.report.train_risk = mc.report.test_risk = kNaN;
      mc.status = std::string("error: ") + e.what();
    }
  });

  const std::size_t expected = cfg.w_d_grid.size() * cfg.w_s_grid.size() * cfg.gammas.size() * per_point;
  if (rows.size() != expected) throw ProtocolError("sweep row count does not match the grid");
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "w_d,w_s,gamma,method,train_risk,test_risk,stderr,n\n";
  for (const auto& r : rows) {
    const bool mc = r.report.method == RiskReport<double>::Method::monte_carlo;
    out << format_double(r.report.weights.w_d) << ',' << format_double(r.report.weights.w_s) << ','
        << format_double(r.report.gamma) << ',' << to_string(r.report.method) << ','
        << format_double(r.report.train_risk) << ',' << format_double(r.report.test_risk) << ','
        << (mc ? format_double(r.std_error) : "") << ',' << (mc ? std::to_string(r.n) : "") << "\n";
  }
}

// ---------------------------------------------------------------------------
// Monte-Carlo check

CheckPoint random_check_point(std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, kCheckStream, index);
  CheckPoint p;
  const auto p_d = static_cast<Eigen::Index>(1 + rng.below(3));
  const auto p_s = static_cast<Eigen::Index>(1 + rng.below(3));
  p.spec.mu_d.resize(p_d);
  p.spec.mu_s.resize(p_s);
  for (Eigen::Index j = 0; j < p_d; ++j) p.spec.mu_d(j) = 0.8 * rng.normal();
  for (Eigen::Index j = 0; j < p_s; ++j) p.spec.mu_s(j) = 0.8 * rng.normal();
  p.spec.sigma_d = 0.5 + 1.5 * rng.uniform();
  p.spec.sigma_s = 0.5 + 1.5 * rng.uniform();
  p.spec.eta = 0.2 + 0.6 * rng.uniform();
  p.spec.gamma = -2.0 + 6.0 * rng.uniform();
  p.weights = {rng.uniform(), rng.uniform()};
  p.domain = (index / 2) % 2 == 0 ? Domain::test : Domain::train;
  p.mixing = index % 3 == 0 ? Mixing::orthogonal(p_d + p_s, derive_seed(seed, index))
                            : Mixing::identity(p_d + p_s);
  if (index % 2 == 0) {
    p.beta = bayes_classifier(p.spec, p.weights);
  } else {
    p.beta.beta_d.resize(p_d);
    p.beta.beta_s.resize(p_s);
    for (Eigen::Index j = 0; j < p_d; ++j) p.beta.beta_d(j) = rng.normal();
    for (Eigen::Index j = 0; j < p_s; ++j) p.beta.beta_s(j) = rng.normal();
    p.beta.beta_0 = 0.5 * rng.normal();
  }
  return p;
}

std::vector<CheckRow> run_mc_check(std::size_t points, std::int64_t n, std::uint64_t seed, unsigned jobs) {
  std::vector<CheckRow> rows(points);
  // Points run one after another; each estimate is parallel over its chunks.
  for (std::size_t i = 0; i < points; ++i) {
    const CheckPoint p = random_check_point(seed, i);
    CheckRow& row = rows[i];
    row.index = i;
    row.closed_form = linear_classifier_risk(p.spec, p.weights, p.beta, p.domain);
    row.estimate = mc_risk(p.spec, p.weights, p.beta, p.domain, p.mixing, n, derive_seed(seed, i, 1), jobs);
    const double diff = row.estimate.mean - row.closed_form;
    row.z = row.estimate.std_error > 0 ? diff / row.estimate.std_error : (diff == 0 ? 0.0 : kNaN);
    row.pass = std::abs(diff) <= 4.0 * row.estimate.std_error;
  }
  return rows;
}

void write_check_csv(std::ostream& out, const std::vector<CheckRow>& rows) {
  out << "index,closed_form,mc_mean,stderr,n,z,pass\n";
  for (const auto& r : rows)
    out << r.index << ',' << format_double(r.closed_form) << ',' << format_double(r.estimate.mean) << ','
        << format_double(r.estimate.std_error) << ',' << r.estimate.n << ',' << format_double(r.z) << ','
        << (r.pass ? 1 : 0) << "\n";
}

// ---------------------------------------------------------------------------
// training experiments

namespace {

struct Task {
  std::size_t config_id;
  Arm arm;
  std::size_t pretrain_index;
  std::size_t seed_index;
};

std::vector<ResultRow> run_task(const ExperimentConfig& cfg, const Mixing& mixing, const TrainConfig& base,
                                const Task& task) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed_value = cfg.seeds[task.seed_index];
  const PretrainKind& kind = cfg.pretrain[task.pretrain_index];

  const Data data = sample_domain(cfg.train, mixing, cfg.n_train, derive_seed(cfg.master_seed, stream::data, seed_value));
  const TwoStageModel init =
      init_pretrained(mixing, cfg.train.p_d(), kind, derive_seed(cfg.master_seed, stream::pretrain, seed_value));
  TrainConfig tc = base;
  tc.seed = derive_seed(cfg.master_seed, task.config_id, task.seed_index);

  ResultRow proto;
  proto.scenario = cfg.scenario;
  proto.seed = seed_value;
  proto.config_id = task.config_id;
  proto.arm = to_string(task.arm);
  proto.pretrain = to_string(kind);
  proto.method = cfg.mc_samples > 0 ? "monte_carlo" : "closed_form";

  std::vector<ResultRow> rows;
  std::optional<TrainResult> result;
  try {
    result = train(init, data, tc, schedule_of(task.arm),
                   uses_swad(task.arm) ? std::optional<SwadConfig>(cfg.swad) : std::nullopt);
  } catch (const TrainingError& e) {
    proto.status = "diverged";
    proto.val_risk = proto.test_risk = proto.test_stderr = proto.exact_test_risk = kNaN;
    proto.feature_distortion = proto.silent_share = proto.rule_silent_norm = kNaN;
    for (double g : cfg.gammas) {
      ResultRow r = proto;
      r.gamma = g;
      rows.push_back(r);
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (auto& r : rows) r.wall_ms = ms;
    return rows;
  }

  const TwoStageModel& model = result->model;
  std::int64_t val_errors = 0;
  for (Eigen::Index i : result->val_indices)
    if (model.predict(data.x.row(i).transpose()) != data.y(i)) ++val_errors;
  proto.val_risk = static_cast<double>(val_errors) / static_cast<double>(result->val_indices.size());
  proto.feature_distortion = feature_distortion(init, model, data.x);
  proto.silent_share = silent_share(model, mixing);
  const Classifier rule = effective_rule(model, mixing);
  proto.rule_silent_norm = rule.beta_s.norm();
  proto.swad = result->swad;

  const std::uint64_t test_seed = derive_seed(cfg.master_seed, stream::test, seed_value);
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    ResultRow r = proto;
    r.gamma = cfg.gammas[gi];
    const DomainSpec spec = test_spec(cfg.train, r.gamma);
    r.exact_test_risk = linear_classifier_risk(spec, Weights{1.0, 1.0}, rule, Domain::test);
    if (cfg.mc_samples > 0) {
      const Data test = sample_domain(spec, mixing, cfg.mc_samples, derive_seed(test_seed, gi));
      const RiskEstimate est = mc_model_risk(model, test);
      r.test_risk = est.mean;
      r.test_stderr = est.std_error;
      r.n = est.n;
    } else {
      r.test_risk = r.exact_test_risk;
      r.test_stderr = 0;
      r.n = 0;
    }
    rows.push_back(r);
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  for (auto& r : rows) r.wall_ms = ms;
  return rows;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

ExperimentResult run_training_experiment(const ExperimentConfig& cfg, unsigned jobs) {
  cfg.validate();
  const Mixing mixing = cfg.mixing();
  const auto grid = cfg.train_grid();

  std::vector<Task> tasks;
  for (std::size_t c = 0; c < grid.size(); ++c)
    for (Arm arm : cfg.arms)
      for (std::size_t k = 0; k < cfg.pretrain.size(); ++k)
        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) tasks.push_back({c, arm, k, s});

  std::vector<std::vector<ResultRow>> outputs(tasks.size());
  parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    outputs[i] = run_task(cfg, mixing, grid[tasks[i].config_id], tasks[i]);
  });

  ExperimentResult result;
  for (auto& rows : outputs)
    for (auto& r : rows) result.rows.push_back(std::move(r));
  result.expected_rows = tasks.size() * cfg.gammas.size();
  if (result.rows.size() != result.expected_rows)
    throw ProtocolError("experiment produced " + std::to_string(result.rows.size()) + " rows, expected " +
                        std::to_string(result.expected_rows));

  // Rows of one (config, arm, pretrain) group are contiguous: seeds outer, gammas inner.
  const std::size_t n_seeds = cfg.seeds.size();
  const std::size_t n_gammas = cfg.gammas.size();
  for (std::size_t base = 0; base < result.rows.size(); base += n_seeds * n_gammas) {
    for (std::size_t gi = 0; gi < n_gammas; ++gi) {
      std::vector<double> test, exact, val, dist;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const ResultRow& r = result.rows[base + s * n_gammas + gi];
        if (r.status != "ok") continue;
        test.push_back(r.test_risk);
        exact.push_back(r.exact_test_risk);
        val.push_back(r.val_risk);
        dist.push_back(r.feature_distortion);
      }
      const ResultRow& first = result.rows[base + gi];
      AggregateRow a;
      a.scenario = first.scenario;
      a.config_id = first.config_id;
      a.arm = first.arm;
      a.pretrain = first.pretrain;
      a.gamma = first.gamma;
      a.n_seeds = test.size();
      a.test_risk_mean = mean_of(test);
      a.test_risk_std = sample_std(test);
      a.exact_test_risk_mean = mean_of(exact);
      a.val_risk_mean = mean_of(val);
      a.feature_distortion_mean = mean_of(dist);
      result.aggregates.push_back(a);
    }
  }
  return result;
}

namespace {

const char* kResultHeader =
    "scenario,seed,config_id,arm,pretrain,gamma,method,val_risk,test_risk,test_stderr,n,exact_test_risk,"
    "feature_distortion,silent_share,rule_silent_norm,swad_t_s,swad_t_e,swad_n_snapshots,status";

double parse_double_field(const std::string& s) {
  if (s.empty()) return kNaN;
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("bad number in CSV: '" + s + "'");
  return v;
}

std::uint64_t parse_uint_field(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("bad integer in CSV: '" + s + "'");
  return v;
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultHeader << "\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.seed << ',' << r.config_id << ',' << r.arm << ',' << r.pretrain << ','
        << format_double(r.gamma) << ',' << r.method << ',' << format_double(r.val_risk) << ','
        << format_double(r.test_risk) << ',' << format_double(r.test_stderr) << ',' << r.n << ','
        << format_double(r.exact_test_risk) << ',' << format_double(r.feature_distortion) << ','
        << format_double(r.silent_share) << ',' << format_double(r.rule_silent_norm) << ',';
    if (r.swad) out << r.swad->t_s << ',' << r.swad->t_e << ',' << r.swad->n_snapshots;
    else out << ",,";
    out << ',' << r.status << "\n";
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("results CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"scenario", "seed", "config_id", "arm", "pretrain", "gamma", "val_risk", "test_risk"})
    if (!col.count(required)) throw ConfigError(std::string("results CSV lacks column '") + required + "'");

  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw ConfigError("results CSV line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                        " fields, expected " + std::to_string(header.size()));
    auto field = [&](const char* name) -> std::string { return col.count(name) ? f[col.at(name)] : std::string(); };
    ResultRow r;
    r.scenario = field("scenario");
    r.seed = parse_uint_field(field("seed"));
    r.config_id = parse_uint_field(field("config_id"));
    r.arm = field("arm");
    r.pretrain = field("pretrain");
    r.gamma = parse_double_field(field("gamma"));
    r.method = field("method");
    r.val_risk = parse_double_field(field("val_risk"));
    r.test_risk = parse_double_field(field("test_risk"));
    r.test_stderr = parse_double_field(field("test_stderr"));
    r.exact_test_risk = parse_double_field(field("exact_test_risk"));
    r.feature_distortion = parse_double_field(field("feature_distortion"));
    r.silent_share = parse_double_field(field("silent_share"));
    r.rule_silent_norm = parse_double_field(field("rule_silent_norm"));
    if (const auto n = field("n"); !n.empty()) r.n = static_cast<std::int64_t>(parse_uint_field(n));
    if (const auto t_s = field("swad_t_s"); !t_s.empty()) {
      SwadReport w;
      w.t_s = parse_uint_field(t_s);
      w.t_e = parse_uint_field(field("swad_t_e"));
      w.n_snapshots = static_cast<std::int64_t>(parse_uint_field(field("swad_n_snapshots")));
      r.swad = w;
    }
    if (col.count("status")) r.status = field("status");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "scenario,config_id,arm,pretrain,gamma,n_seeds,test_risk_mean,test_risk_std,exact_test_risk_mean,"
         "val_risk_mean,feature_distortion_mean\n";
  for (const auto& a : rows)
    out << a.scenario << ',' << a.config_id << ',' << a.arm << ',' << a.pretrain << ',' << format_double(a.gamma)
        << ',' << a.n_seeds << ',' << format_double(a.test_risk_mean) << ',' << format_double(a.test_risk_std) << ','
        << format_double(a.exact_test_risk_mean) << ',' << format_double(a.val_risk_mean) << ','
        << format_double(a.feature_distortion_mean) << "\n";
}

void write_timing_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "config_id,arm,pretrain,seed,wall_ms\n";
  std::set<std::tuple<std::size_t, std::string, std::string, std::uint64_t>> seen;
  for (const auto& r : rows)
    if (seen.insert({r.config_id, r.arm, r.pretrain, r.seed}).second)
      out << r.config_id << ',' << r.arm << ',' << r.pretrain << ',' << r.seed << ',' << format_double(r.wall_ms)
          << "\n";
}

nlohmann::json experiment_metadata(const ExperimentConfig& cfg, const ExperimentResult& result) {
  nlohmann::json meta;
  meta["schema"] = "silentlab-run/1";
  meta["version"] = kVersion;
  meta["command"] = "experiment";
  meta["scenario"] = cfg.scenario;
  meta["master_seed"] = cfg.master_seed;
  meta["seeds"] = cfg.seeds;
  meta["n_rows"] = result.rows.size();
  meta["expected_rows"] = result.expected_rows;
  meta["n_aggregate_rows"] = result.aggregates.size();
  std::ostringstream config_text;
  write_config(config_text, cfg);
  meta["config"] = config_text.str();

  nlohmann::json windows = nlohmann::json::array();
  nlohmann::json failures = nlohmann::json::array();
  std::set<std::tuple<std::size_t, std::string, std::string, std::uint64_t>> seen;
  for (const auto& r : result.rows) {
    if (!seen.insert({r.config_id, r.arm, r.pretrain, r.seed}).second) continue;
    if (r.status != "ok")
      failures.push_back({{"config_id", r.config_id}, {"arm", r.arm}, {"pretrain", r.pretrain}, {"seed", r.seed},
                          {"status", r.status}});
    if (!r.swad) continue;
    windows.push_back({{"config_id", r.config_id},
                       {"arm", r.arm},
                       {"pretrain", r.pretrain},
                       {"seed", r.seed},
                       {"t_s", r.swad->t_s},
                       {"t_e", r.swad->t_e},
                       {"iter_begin", r.swad->iter_begin},
                       {"iter_end", r.swad->iter_end},
                       {"n_snapshots", r.swad->n_snapshots},
                       {"fallback_used", r.swad->fallback_used}});
  }
  meta["swad"] = windows;
  meta["failures"] = failures;
  return meta;
}

// ---------------------------------------------------------------------------
// grid selection

SelectionCriterion parse_criterion(const std::string& s) {
  if (s == "train_val") return SelectionCriterion::train_val;
  if (s == "test_val") return SelectionCriterion::test_val;
  throw ConfigError("criterion must be train_val or test_val");
}

GridSelection grid_select(const std::vector<ResultRow>& rows, SelectionCriterion criterion) {
  if (rows.empty()) throw ProtocolError("grid_select: no rows");

  using Cell = std::tuple<std::size_t, std::uint64_t, double>;  // config, seed, gamma
  std::map<Cell, const ResultRow*> selected;
  std::set<std::size_t> configs;
  std::set<std::uint64_t> seeds;
  std::set<double> gammas;
  for (const auto& r : rows) {
    configs.insert(r.config_id);
    seeds.insert(r.seed);
    gammas.insert(r.gamma);
    const Cell cell{r.config_id, r.seed, r.gamma};
    auto [it, inserted] = selected.try_emplace(cell, nullptr);
    const bool usable = r.status == "ok" && !std::isnan(r.val_risk);
    if (usable && (it->second == nullptr || r.val_risk < it->second->val_risk)) it->second = &r;
  }

  const std::size_t n_configs = *configs.rbegin() + 1;
  std::vector<std::string> missing;
  for (std::size_t c = 0; c < n_configs; ++c)
    for (std::uint64_t s : seeds)
      for (double g : gammas)
        if (!selected.count({c, s, g}))
          missing.push_back("config=" + std::to_string(c) + " seed=" + std::to_string(s) + " gamma=" + format_double(g));
  if (!missing.empty()) {
    std::string msg = "incomplete grid, missing cells:";
    for (const auto& m : missing) msg += " [" + m + "]";
    throw ProtocolError(msg);
  }

  GridSelection out;
  out.scores.assign(n_configs, 0.0);
  for (std::size_t c = 0; c < n_configs; ++c) {
    double sum = 0;
    std::size_t count = 0;
    bool complete = true;
    for (std::uint64_t s : seeds)
      for (double g : gammas) {
        const ResultRow* r = selected.at({c, s, g});
        if (!r) {
          complete = false;
          continue;
        }
        sum += criterion == SelectionCriterion::train_val ? r->val_risk : r->test_risk;
        ++count;
      }
    out.scores[c] = complete && count > 0 ? sum / static_cast<double>(count) : std::numeric_limits<double>::infinity();
  }
  out.config_id = static_cast<std::size_t>(std::min_element(out.scores.begin(), out.scores.end()) - out.scores.begin());
  return out;
}

// ---------------------------------------------------------------------------
// two-feature demo

double DecisionLine::silent_component() const {
  const double norm = std::hypot(rule.beta_d.norm(), rule.beta_s.norm());
  return norm > 0 ? rule.beta_s.norm() / norm : 0.0;
}

ExperimentConfig fig3_default_config() {
  ExperimentConfig cfg;
  cfg.scenario = "fig3";
  cfg.train.mu_d = Eigen::VectorXd::Constant(1, 1.0);
  cfg.train.mu_s = Eigen::VectorXd::Constant(1, 0.5);
  cfg.gammas = {4.0};
  cfg.lr_lp = {0.5};
  cfg.lp_iters = {500};
  cfg.ft_iters = {0};
  cfg.n_train = 2000;
  cfg.mc_samples = 2000;
  return cfg;
}

Fig3Demo demo_fig3(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.train.p_d() != 1 || cfg.train.p_s() != 1) throw ConfigError("demo-fig3 needs p_d = p_s = 1");
  const Mixing mixing = cfg.mixing();
  Fig3Demo demo;
  demo.train = sample_domain(cfg.train, mixing, cfg.n_train, derive_seed(cfg.master_seed, stream::data, 0));
  const double gamma = cfg.gammas.back();
  demo.test = sample_domain(test_spec(cfg.train, gamma), mixing, std::max<std::int64_t>(cfg.mc_samples, 1),
                            derive_seed(cfg.master_seed, stream::test, 0));

  demo.lines.push_back({"bayes_w11", bayes_classifier(cfg.train, Weights{1.0, 1.0})});
  demo.lines.push_back({"bayes_w10", bayes_classifier(cfg.train, Weights{1.0, 0.0})});
  TrainConfig tc = cfg.train_grid().front();
  tc.seed = derive_seed(cfg.master_seed, 0, 0);
  for (const auto& kind : {PretrainKind::oracle_silent(), PretrainKind::oracle_dominant()}) {
    const TwoStageModel init = init_pretrained(mixing, 1, kind, derive_seed(cfg.master_seed, stream::pretrain, 0));
    const TrainResult r = train(init, demo.train, tc, Schedule::lp_only);
    demo.lines.push_back({"lp_" + to_string(kind), effective_rule(r.model, mixing)});
  }
  return demo;
}

void write_fig3_data_csv(std::ostream& out, const Fig3Demo& demo) {
  out << "split,y,texture,shape\n";
  auto emit = [&](const char* split, const Data& d) {
    for (Eigen::Index i = 0; i < d.size(); ++i)
      out << split << ',' << d.y(i) << ',' << format_double(d.z_d(i, 0)) << ',' << format_double(d.z_s(i, 0)) << "\n";
  };
  emit("train", demo.train);
  emit("test", demo.test);
}

void write_fig3_lines_csv(std::ostream& out, const Fig3Demo& demo) {
  // Line: beta_d * texture + beta_s * shape + beta_0 = 0.
  out << "line,beta_d,beta_s,beta_0,silent_component,slope,intercept\n";
  for (const auto& l : demo.lines) {
    const double bd = l.rule.beta_d(0), bs = l.rule.beta_s(0), b0 = l.rule.beta_0;
    const bool finite_slope = bs != 0.0;
    out << l.name << ',' << format_double(bd) << ',' << format_double(bs) << ',' << format_double(b0) << ','
        << format_double(l.silent_component()) << ',' << (finite_slope ? format_double(-bd / bs) : "inf") << ','
        << (finite_slope ? format_double(-b0 / bs) : "") << "\n";
  }
}

}  // namespace silent
