#include "silent/config.hpp"

#include "silent/csv.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace silent {

namespace pt = boost::property_tree;

const char* to_string(Arm a) {
  switch (a) {
    case Arm::erm: return "erm";
    case Arm::lp_only: return "lp_only";
    case Arm::lp_ft: return "lp_ft";
    case Arm::lp_ft_swad: return "lp_ft_swad";
  }
  return "?";
}

Arm parse_arm(const std::string& s) {
  if (s == "erm") return Arm::erm;
  if (s == "lp_only") return Arm::lp_only;
  if (s == "lp_ft") return Arm::lp_ft;
  if (s == "lp_ft_swad") return Arm::lp_ft_swad;
  throw ConfigError("unknown arm '" + s + "'");
}

Schedule schedule_of(Arm a) {
  switch (a) {
    case Arm::erm: return Schedule::erm;
    case Arm::lp_only: return Schedule::lp_only;
    case Arm::lp_ft:
    case Arm::lp_ft_swad: return Schedule::lp_ft;
  }
  return Schedule::erm;
}

DomainSpec ExperimentConfig::default_train_spec() {
  DomainSpec s;
  s.mu_d = Eigen::Vector2d(1.0, 0.0);
  s.mu_s = Eigen::Vector2d(0.0, 0.1);
  s.sigma_d = 1.0;
  s.sigma_s = 1.0;
  s.eta = 0.5;
  s.gamma = 1.0;
  return s;
}

Mixing ExperimentConfig::mixing() const {
  return mixing_kind == MixingKind::identity ? Mixing::identity(train.dim())
                                             : Mixing::orthogonal(train.dim(), mixing_seed);
}

std::vector<Weights> ExperimentConfig::weight_grid() const {
  std::vector<Weights> out;
  for (double wd : w_d_grid)
    for (double ws : w_s_grid) out.push_back({wd, ws});
  return out;
}

std::vector<TrainConfig> ExperimentConfig::train_grid() const {
  std::vector<TrainConfig> out;
  for (double a : lr_lp)
    for (double b : lr_ft)
      for (std::size_t k = 0; k < lp_iters.size(); ++k) {
        TrainConfig t;
        t.lr_lp = a;
        t.lr_ft = b;
        t.lp_iters = lp_iters[k];
        t.ft_iters = ft_iters[k];
        t.val_fraction = val_fraction;
        if (minibatch > 0) t.minibatch = minibatch;
        t.log_interval = log_interval;
        out.push_back(t);
      }
  return out;
}

void ExperimentConfig::validate() const {
  train.validate();
  if (train.gamma != 1.0) throw ConfigError("the training spec must have gamma = 1");
  if (scenario.empty() || scenario.find_first_of(",\n\"") != std::string::npos)
    throw ConfigError("scenario name must be nonempty and free of commas, quotes and newlines");
  if (gammas.empty() || w_d_grid.empty() || w_s_grid.empty()) throw ConfigError("grids must be nonempty");
  if (lr_lp.empty() || lr_ft.empty() || lp_iters.empty()) throw ConfigError("training grid must be nonempty");
  if (lp_iters.size() != ft_iters.size()) throw ConfigError("lp_iters and ft_iters must have the same length");
  for (const Weights& w : weight_grid()) w.validate();
  for (const TrainConfig& t : train_grid()) t.validate();
  swad.validate();
  if (arms.empty() || pretrain.empty()) throw ConfigError("arms and pretrain kinds must be nonempty");
  if (n_train < 2) throw ConfigError("n_train must be >= 2");
  if (mc_samples < 0) throw ConfigError("mc_samples must be >= 0");
  if (seeds.empty()) throw ConfigError("at least one repetition seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ConfigError("repetition seeds must be distinct");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  if (trim(s).empty()) return out;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty entry in list '" + s + "'");
    out.push_back(item);
  }
  return out;
}

double parse_real(const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (trim(s.substr(pos)).size() != 0) throw ConfigError("not a number: '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not an integer: '" + s + "'");
  }
  if (trim(s.substr(pos)).size() != 0) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  const std::int64_t v = parse_int(s);
  if (v < 0) throw ConfigError("expected a non-negative integer: '" + s + "'");
  return static_cast<std::uint64_t>(v);
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += f(v[i]);
  }
  return out;
}

std::string join_reals(const std::vector<double>& v) {
  return join(v, [](double d) { return format_double(d); });
}

std::string join_vector(const Eigen::VectorXd& v) {
  return join_reals(std::vector<double>(v.data(), v.data() + v.size()));
}

// Keys a section may contain; anything else is rejected so typos surface.
const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"meta", {"schema"}},
      {"scenario", {"name"}},
      {"domain", {"mu_d", "mu_s", "sigma_d", "sigma_s", "eta", "silent_norm_bound", "mixing", "mixing_seed"}},
      {"shift", {"gammas"}},
      {"suppression", {"w_d", "w_s"}},
      {"train", {"lr_lp", "lr_ft", "lp_iters", "ft_iters", "val_fraction", "minibatch", "n_train", "log_interval",
                 "arms", "pretrain", "pretrain_noise"}},
      {"swad", {"r", "eval_interval", "n_s"}},
      {"run", {"mc_samples", "master_seed", "seeds"}},
  };
  return keys;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_real(item));
  return out;
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) throw ConfigError("unknown config section [" + section + "]");
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside of a section");
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
  }

  const auto schema = tree.get_optional<std::string>("meta.schema");
  if (!schema) throw ConfigError("missing [meta] schema");
  if (trim(*schema) != kConfigSchema)
    throw ConfigError("unsupported config schema '" + *schema + "', expected " + kConfigSchema);

  ExperimentConfig cfg;
  auto get = [&](const char* path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(path)) return trim(*v);
    return std::nullopt;
  };

  if (auto v = get("scenario.name")) cfg.scenario = *v;

  if (auto v = get("domain.mu_d")) cfg.train.mu_d = to_vector(parse_real_list(*v));
  if (auto v = get("domain.mu_s")) cfg.train.mu_s = to_vector(parse_real_list(*v));
  if (auto v = get("domain.sigma_d")) cfg.train.sigma_d = parse_real(*v);
  if (auto v = get("domain.sigma_s")) cfg.train.sigma_s = parse_real(*v);
  if (auto v = get("domain.eta")) cfg.train.eta = parse_real(*v);
  if (auto v = get("domain.silent_norm_bound"); v && !v->empty()) cfg.train.silent_norm_bound = parse_real(*v);
  if (auto v = get("domain.mixing")) {
    if (*v == "identity") cfg.mixing_kind = MixingKind::identity;
    else if (*v == "orthogonal") cfg.mixing_kind = MixingKind::orthogonal;
    else throw ConfigError("mixing must be identity or orthogonal");
  }
  if (auto v = get("domain.mixing_seed")) cfg.mixing_seed = parse_uint(*v);

  if (auto v = get("shift.gammas")) cfg.gammas = parse_real_list(*v);
  if (auto v = get("suppression.w_d")) cfg.w_d_grid = parse_real_list(*v);
  if (auto v = get("suppression.w_s")) cfg.w_s_grid = parse_real_list(*v);

  auto int_list = [](const std::string& s) {
    std::vector<std::int64_t> out;
    for (const auto& item : split_list(s)) out.push_back(parse_int(item));
    return out;
  };
  if (auto v = get("train.lr_lp")) cfg.lr_lp = parse_real_list(*v);
  if (auto v = get("train.lr_ft")) cfg.lr_ft = parse_real_list(*v);
  if (auto v = get("train.lp_iters")) cfg.lp_iters = int_list(*v);
  if (auto v = get("train.ft_iters")) cfg.ft_iters = int_list(*v);
  if (auto v = get("train.val_fraction")) cfg.val_fraction = parse_real(*v);
  if (auto v = get("train.minibatch")) cfg.minibatch = parse_int(*v);
  if (auto v = get("train.n_train")) cfg.n_train = parse_int(*v);
  if (auto v = get("train.log_interval")) cfg.log_interval = parse_int(*v);
  if (auto v = get("train.arms")) {
    cfg.arms.clear();
    for (const auto& item : split_list(*v)) cfg.arms.push_back(parse_arm(item));
  }
  double pretrain_noise = 0.0;
  if (auto v = get("train.pretrain_noise")) pretrain_noise = parse_real(*v);
  if (auto v = get("train.pretrain")) {
    cfg.pretrain.clear();
    for (const auto& item : split_list(*v)) cfg.pretrain.push_back(parse_pretrain_kind(item));
  }
  for (auto& k : cfg.pretrain)
    if (k.kind == PretrainKind::Kind::noisy_oracle) k.noise_scale = pretrain_noise;

  if (auto v = get("swad.r")) cfg.swad.r = parse_real(*v);
  if (auto v = get("swad.eval_interval")) cfg.swad.eval_interval = parse_int(*v);
  if (auto v = get("swad.n_s")) cfg.swad.n_s = parse_int(*v);

  if (auto v = get("run.mc_samples")) cfg.mc_samples = parse_int(*v);
  if (auto v = get("run.master_seed")) cfg.master_seed = parse_uint(*v);
  if (auto v = get("run.seeds")) {
    cfg.seeds.clear();
    for (const auto& item : split_list(*v)) cfg.seeds.push_back(parse_uint(item));
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

void write_domain_block(std::ostream& out, const DomainSpec& spec, MixingKind kind, std::uint64_t mixing_seed) {
  out << "[domain]\n";
  out << "# dominant-feature mean (length p_d) and silent-feature mean (length p_s)\n";
  out << "mu_d = " << join_vector(spec.mu_d) << "\n";
  out << "mu_s = " << join_vector(spec.mu_s) << "\n";
  out << "sigma_d = " << format_double(spec.sigma_d) << "\n";
  out << "sigma_s = " << format_double(spec.sigma_s) << "\n";
  out << "# P(y = +1)\n";
  out << "eta = " << format_double(spec.eta) << "\n";
  out << "# optional bound C on |mu_s|^2; violations only warn\n";
  out << "silent_norm_bound = " << (spec.silent_norm_bound ? format_double(*spec.silent_norm_bound) : "") << "\n";
  out << "# identity | orthogonal (seeded QR)\n";
  out << "mixing = " << to_string(kind) << "\n";
  out << "mixing_seed = " << mixing_seed << "\n";
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  out << "# silentlab experiment configuration\n";
  out << "[meta]\n";
  out << "schema = " << kConfigSchema << "\n\n";
  out << "[scenario]\n";
  out << "name = " << cfg.scenario << "\n\n";
  write_domain_block(out, cfg.train, cfg.mixing_kind, cfg.mixing_seed);
  out << "\n[shift]\n";
  out << "# silent-feature scaling of each test domain\n";
  out << "gammas = " << join_reals(cfg.gammas) << "\n\n";
  out << "[suppression]\n";
  out << "# grid of suppression weights for risk-sweep (cartesian product)\n";
  out << "w_d = " << join_reals(cfg.w_d_grid) << "\n";
  out << "w_s = " << join_reals(cfg.w_s_grid) << "\n\n";
  out << "[train]\n";
  out << "# learning rates form a cartesian product; lp_iters/ft_iters are paired\n";
  out << "lr_lp = " << join_reals(cfg.lr_lp) << "\n";
  out << "lr_ft = " << join_reals(cfg.lr_ft) << "\n";
  auto ints = [](const std::vector<std::int64_t>& v) { return join(v, [](std::int64_t i) { return std::to_string(i); }); };
  out << "lp_iters = " << ints(cfg.lp_iters) << "\n";
  out << "ft_iters = " << ints(cfg.ft_iters) << "\n";
  out << "val_fraction = " << format_double(cfg.val_fraction) << "\n";
  out << "# 0 = full batch\n";
  out << "minibatch = " << cfg.minibatch << "\n";
  out << "n_train = " << cfg.n_train << "\n";
  out << "log_interval = " << cfg.log_interval << "\n";
  out << "# erm | lp_only | lp_ft | lp_ft_swad\n";
  out << "arms = " << join(cfg.arms, [](Arm a) { return std::string(to_string(a)); }) << "\n";
  out << "# oracle_silent | oracle_dominant | noisy_oracle\n";
  out << "pretrain = " << join(cfg.pretrain, [](const PretrainKind& k) { return to_string(k); }) << "\n";
  double noise = 0.0;
  for (const auto& k : cfg.pretrain)
    if (k.kind == PretrainKind::Kind::noisy_oracle) noise = k.noise_scale;
  out << "pretrain_noise = " << format_double(noise) << "\n\n";
  out << "[swad]\n";
  out << "r = " << format_double(cfg.swad.r) << "\n";
  out << "eval_interval = " << cfg.swad.eval_interval << "\n";
  out << "n_s = " << cfg.swad.n_s << "\n\n";
  out << "[run]\n";
  out << "# Monte-Carlo samples per evaluation; 0 disables the MC cross-check in risk-sweep\n";
  out << "mc_samples = " << cfg.mc_samples << "\n";
  out << "master_seed = " << cfg.master_seed << "\n";
  out << "seeds = " << join(cfg.seeds, [](std::uint64_t s) { return std::to_string(s); }) << "\n";
}

}  // namespace silent
