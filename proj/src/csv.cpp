#include "silent/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace silent {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_dataset_csv(std::ostream& out, const Data& data, bool include_latents) {
  const bool latents = include_latents && data.has_latents();
  out << "y";
  for (Eigen::Index j = 0; j < data.x.cols(); ++j) out << ",x_" << j;
  if (latents) {
    for (Eigen::Index j = 0; j < data.z_d.cols(); ++j) out << ",zd_" << j;
    for (Eigen::Index j = 0; j < data.z_s.cols(); ++j) out << ",zs_" << j;
  }
  out << "\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out << data.y(i);
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) out << ',' << format_double(data.x(i, j));
    if (latents) {
      for (Eigen::Index j = 0; j < data.z_d.cols(); ++j) out << ',' << format_double(data.z_d(i, j));
      for (Eigen::Index j = 0; j < data.z_s.cols(); ++j) out << ',' << format_double(data.z_s(i, j));
    }
    out << "\n";
  }
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "iter,phase,train_loss,val_loss,swad_active\n";
  for (const auto& r : trace)
    out << r.iter << ',' << r.phase << ',' << format_double(r.train_loss) << ',' << format_double(r.val_loss) << ','
        << (r.swad_active ? 1 : 0) << "\n";
}

void write_model(std::ostream& out, const TwoStageModel& model) {
  out << "silentlab-model/1\n";
  out << "dims " << model.p_d() << ' ' << model.p_s() << "\n";
  out << "featurizer\n";
  for (Eigen::Index i = 0; i < model.featurizer.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.featurizer.cols(); ++j)
      out << (j ? " " : "") << format_double(model.featurizer(i, j));
    out << "\n";
  }
  out << "head_d";
  for (Eigen::Index j = 0; j < model.p_d(); ++j) out << ' ' << format_double(model.head.beta_d(j));
  out << "\nhead_s";
  for (Eigen::Index j = 0; j < model.p_s(); ++j) out << ' ' << format_double(model.head.beta_s(j));
  out << "\nbias " << format_double(model.head.beta_0) << "\n";
}

TwoStageModel read_model(std::istream& in) {
  auto expect = [&](const std::string& word) {
    std::string token;
    if (!(in >> token) || token != word) throw ConfigError("model checkpoint: expected '" + word + "'");
  };
  auto real = [&] {
    std::string token;
    if (!(in >> token)) throw ConfigError("model checkpoint: truncated");
    double v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
      throw ConfigError("model checkpoint: bad number '" + token + "'");
    return v;
  };
  expect("silentlab-model/1");
  expect("dims");
  Eigen::Index p_d = 0, p_s = 0;
  if (!(in >> p_d >> p_s) || p_d < 1 || p_s < 1) throw ConfigError("model checkpoint: bad dims");
  const Eigen::Index p = p_d + p_s;
  TwoStageModel m;
  expect("featurizer");
  m.featurizer.resize(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m.featurizer(i, j) = real();
  expect("head_d");
  m.head.beta_d.resize(p_d);
  for (Eigen::Index j = 0; j < p_d; ++j) m.head.beta_d(j) = real();
  expect("head_s");
  m.head.beta_s.resize(p_s);
  for (Eigen::Index j = 0; j < p_s; ++j) m.head.beta_s(j) = real();
  expect("bias");
  m.head.beta_0 = real();
  return m;
}

}  // namespace silent
