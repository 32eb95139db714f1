// silentlab command-line driver.
#include "silent/config.hpp"
#include "silent/csv.hpp"
#include "silent/harness.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace silent;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  unsigned jobs = 1;
};

ExperimentConfig load(const GlobalOptions& g, ExperimentConfig fallback = {}) {
  ExperimentConfig cfg = g.config_path.empty() ? std::move(fallback) : load_config(g.config_path);
  if (g.seed) cfg.master_seed = *g.seed;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const GlobalOptions& g, const std::string& name) {
  fs::create_directories(g.out);
  const fs::path path = fs::path(g.out) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  return f;
}

void write_json(const GlobalOptions& g, const std::string& name, const nlohmann::json& j) {
  auto f = open_out(g, name);
  f << j.dump(2) << "\n";
}

void print_warnings(const ExperimentConfig& cfg) {
  for (const auto& w : cfg.train.validate()) std::cerr << "warning: " << w << "\n";
}

nlohmann::json swad_json(const SwadReport& r) {
  return {{"t_s", r.t_s},
          {"t_e", r.t_e},
          {"iter_begin", r.iter_begin},
          {"iter_end", r.iter_end},
          {"n_snapshots", r.n_snapshots},
          {"fallback_used", r.fallback_used}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"silentlab: silent vs dominant feature risk laboratory"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "Experiment config file (see `defaults`)");
  app.add_option("--seed", g.seed, "Override the master seed");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  auto* generate = app.add_subcommand("generate", "Sample a dataset from the train or a shifted test domain");
  double gen_gamma = 1.0;
  std::optional<std::int64_t> gen_n;
  bool gen_latents = false;
  generate->add_option("--gamma", gen_gamma, "Silent-feature scaling (1 = training domain)")->capture_default_str();
  generate->add_option("-n,--count", gen_n, "Number of samples (default: n_train)");
  generate->add_flag("--latents", gen_latents, "Append latent columns");

  auto* sweep = app.add_subcommand("risk-sweep", "Closed-form (and optional MC) risks over the weight x gamma grid");
  bool sweep_no_mc = false;
  sweep->add_flag("--no-mc", sweep_no_mc, "Skip the Monte-Carlo cross-check");

  auto* mc_check = app.add_subcommand("mc-check", "Monte-Carlo vs closed-form risk on random parameter draws");
  std::size_t check_points = 20;
  std::int64_t check_n = 1000000;
  mc_check->add_option("--points", check_points)->capture_default_str();
  mc_check->add_option("-n,--samples", check_n)->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "Train one model and write its trace and checkpoint");
  std::string schedule_name = "lp_ft", pretrain_name = "oracle_silent";
  std::size_t config_id = 0, seed_index = 0;
  bool use_swad = false;
  train_cmd->add_option("--schedule", schedule_name, "erm | lp_only | lp_ft")->capture_default_str();
  train_cmd->add_option("--pretrain", pretrain_name, "oracle_silent | oracle_dominant | noisy_oracle")
      ->capture_default_str();
  train_cmd->add_option("--config-id", config_id, "Entry of the training grid")->capture_default_str();
  train_cmd->add_option("--seed-index", seed_index, "Entry of the repetition seed list")->capture_default_str();
  train_cmd->add_flag("--swad", use_swad, "Average weights over the fine-tuning phase");

  auto* experiment = app.add_subcommand("experiment", "Run every arm x backbone x seed x config and evaluate");

  auto* select = app.add_subcommand("grid-select", "Pick the best training config from experiment results");
  std::string rows_path, criterion_name = "test_val", arm_filter, pretrain_filter;
  select->add_option("--rows", rows_path, "results.csv from `experiment`")->required();
  select->add_option("--criterion", criterion_name, "train_val | test_val")->capture_default_str();
  select->add_option("--arm", arm_filter, "Only rows of this arm");
  select->add_option("--pretrain", pretrain_filter, "Only rows of this backbone");

  auto* fig3 = app.add_subcommand("demo-fig3", "Emit the two-feature texture/shape scenario for plotting");
  auto* defaults = app.add_subcommand("defaults", "Print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*defaults) {
      write_config(std::cout, load(g));
    } else if (*generate) {
      const ExperimentConfig cfg = load(g);
      print_warnings(cfg);
      const DomainSpec spec = test_spec(cfg.train, gen_gamma);
      const std::int64_t n = gen_n.value_or(cfg.n_train);
      const std::uint64_t seed = derive_seed(cfg.master_seed, stream::data, 0);
      const Data data = sample_domain(spec, cfg.mixing(), n, seed);
      auto csv = open_out(g, "dataset.csv");
      write_dataset_csv(csv, data, gen_latents);
      auto block = open_out(g, "dataset.cfg");
      block << "# silentlab dataset sidecar\n[meta]\nschema = " << kConfigSchema << "\n\n";
      write_domain_block(block, cfg.train, cfg.mixing_kind, cfg.mixing_seed);
      block << "\n[shift]\ngammas = " << format_double(gen_gamma) << "\n";
      write_json(g, "dataset.json", {{"schema", "silentlab-dataset/1"},
                                     {"version", kVersion},
                                     {"gamma", gen_gamma},
                                     {"n", n},
                                     {"seed", seed},
                                     {"latents", gen_latents}});
    } else if (*sweep) {
      ExperimentConfig cfg = load(g);
      if (sweep_no_mc) cfg.mc_samples = 0;
      const auto rows = run_sweep(cfg, g.jobs);
      auto csv = open_out(g, "risk_sweep.csv");
      write_sweep_csv(csv, rows);
      nlohmann::json errors = nlohmann::json::array();
      for (const auto& r : rows)
        if (r.status != "ok") errors.push_back({{"config_id", r.config_id}, {"status", r.status}});
      write_json(g, "risk_sweep.json", {{"schema", "silentlab-run/1"},
                                        {"version", kVersion},
                                        {"command", "risk-sweep"},
                                        {"scenario", cfg.scenario},
                                        {"master_seed", cfg.master_seed},
                                        {"n_rows", rows.size()},
                                        {"errors", errors}});
    } else if (*mc_check) {
      const std::uint64_t seed = g.seed.value_or(0);
      const auto rows = run_mc_check(check_points, check_n, seed, g.jobs);
      auto csv = open_out(g, "mc_check.csv");
      write_check_csv(csv, rows);
      std::size_t passed = 0;
      for (const auto& r : rows) passed += r.pass ? 1 : 0;
      std::cout << passed << "/" << rows.size() << " points within 4 stderr\n";
      const std::size_t needed = rows.size() - rows.size() / 20;
      if (passed < needed) return 3;
    } else if (*train_cmd) {
      const ExperimentConfig cfg = load(g);
      print_warnings(cfg);
      const auto grid = cfg.train_grid();
      if (config_id >= grid.size()) throw ConfigError("--config-id is outside the training grid");
      if (seed_index >= cfg.seeds.size()) throw ConfigError("--seed-index is outside the seed list");
      const Mixing mixing = cfg.mixing();
      const std::uint64_t seed_value = cfg.seeds[seed_index];
      PretrainKind kind = parse_pretrain_kind(pretrain_name);
      for (const auto& k : cfg.pretrain)
        if (k.kind == kind.kind) kind.noise_scale = k.noise_scale;
      const Data data = sample_domain(cfg.train, mixing, cfg.n_train, derive_seed(cfg.master_seed, stream::data, seed_value));
      const TwoStageModel init =
          init_pretrained(mixing, cfg.train.p_d(), kind, derive_seed(cfg.master_seed, stream::pretrain, seed_value));
      TrainConfig tc = grid[config_id];
      tc.seed = derive_seed(cfg.master_seed, config_id, seed_index);
      const TrainResult result = train(init, data, tc, parse_schedule(schedule_name),
                                       use_swad ? std::optional<SwadConfig>(cfg.swad) : std::nullopt);
      auto trace = open_out(g, "trace.csv");
      write_trace_csv(trace, result.trace);
      auto model = open_out(g, "model.txt");
      write_model(model, result.model);
      const Classifier rule = effective_rule(result.model, mixing);
      nlohmann::json meta{{"schema", "silentlab-run/1"},
                          {"version", kVersion},
                          {"command", "train"},
                          {"schedule", schedule_name},
                          {"pretrain", to_string(kind)},
                          {"config_id", config_id},
                          {"seed", seed_value},
                          {"feature_distortion", feature_distortion(init, result.model, data.x)},
                          {"silent_share", silent_share(result.model, mixing)},
                          {"effective_rule",
                           {{"beta_d", std::vector<double>(rule.beta_d.data(), rule.beta_d.data() + rule.p_d())},
                            {"beta_s", std::vector<double>(rule.beta_s.data(), rule.beta_s.data() + rule.p_s())},
                            {"beta_0", rule.beta_0}}}};
      meta["swad"] = result.swad ? swad_json(*result.swad) : nlohmann::json(nullptr);
      write_json(g, "train.json", meta);
    } else if (*experiment) {
      const ExperimentConfig cfg = load(g);
      print_warnings(cfg);
      const ExperimentResult result = run_training_experiment(cfg, g.jobs);
      auto rows = open_out(g, "results.csv");
      write_results_csv(rows, result.rows);
      auto agg = open_out(g, "aggregate.csv");
      write_aggregate_csv(agg, result.aggregates);
      write_json(g, "experiment.json", experiment_metadata(cfg, result));
      auto timing = open_out(g, "timing.csv");
      write_timing_csv(timing, result.rows);
    } else if (*select) {
      std::ifstream in(rows_path);
      if (!in) throw ConfigError("cannot open '" + rows_path + "'");
      auto rows = read_results_csv(in);
      std::erase_if(rows, [&](const ResultRow& r) {
        return (!arm_filter.empty() && r.arm != arm_filter) || (!pretrain_filter.empty() && r.pretrain != pretrain_filter);
      });
      const GridSelection sel = grid_select(rows, parse_criterion(criterion_name));
      std::cout << nlohmann::json{{"criterion", criterion_name}, {"config_id", sel.config_id}, {"scores", sel.scores}}.dump()
                << "\n";
    } else if (*fig3) {
      const ExperimentConfig cfg = load(g, fig3_default_config());
      const Fig3Demo demo = demo_fig3(cfg);
      auto data = open_out(g, "fig3_data.csv");
      write_fig3_data_csv(data, demo);
      auto lines = open_out(g, "fig3_lines.csv");
      write_fig3_lines_csv(lines, demo);
    }
  } catch (const Error& e) {
    std::cerr << nlohmann::json{{"errors", {{{"kind", e.kind()}, {"message", e.what()}}}}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"errors", {{{"kind", "internal"}, {"message", e.what()}}}}}.dump() << "\n";
    return 2;
  }
  return 0;
}
