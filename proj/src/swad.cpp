#include "silent/swad.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace silent {

SwadWindow schedule(std::span<const double> losses, const SwadConfig& cfg) {
  cfg.validate();
  if (losses.empty()) throw DomainError("swad schedule needs at least one loss");
  for (double l : losses)
    if (!std::isfinite(l)) throw DomainError("swad schedule needs finite losses");

  const std::size_t n = losses.size();
  const auto window = static_cast<std::size_t>(cfg.n_s);
  SwadWindow w{n - 1, n};
  for (std::size_t i = 0; i < n; ++i) {
    const auto end = losses.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + window));
    if (losses[i] == *std::min_element(losses.begin() + static_cast<std::ptrdiff_t>(i), end)) {
      w.t_s = i;
      break;
    }
  }
  double running_min = *std::min_element(losses.begin(), losses.begin() + static_cast<std::ptrdiff_t>(w.t_s + 1));
  for (std::size_t j = w.t_s + 1; j < n; ++j) {
    running_min = std::min(running_min, losses[j]);
    if (losses[j] > (1.0 + cfg.r) * running_min) {
      w.t_e = j;
      break;
    }
  }
  return w;
}

SwadState::SwadState(SwadConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void SwadState::accumulate(std::int64_t iteration, const Eigen::VectorXd& params) {
  if (iteration < 0 || (last_iteration_ && iteration <= *last_iteration_))
    throw ContractError("swad accumulate called out of order at iteration " + std::to_string(iteration));
  if (last_ && last_->size() != params.size()) throw ContractError("swad snapshot size changed");
  const auto block = static_cast<std::size_t>(iteration / cfg_.eval_interval);
  if (blocks_.size() <= block) blocks_.resize(block + 1);
  Block& b = blocks_[block];
  if (b.count == 0) b.sum = params;
  else b.sum += params;
  ++b.count;
  last_iteration_ = iteration;
  last_ = params;
}

void SwadState::record_loss(std::int64_t iteration, double loss) {
  if (!losses_.empty() && iteration <= losses_.back().first)
    throw ContractError("swad losses must be recorded in increasing iteration order");
  losses_.emplace_back(iteration, loss);
}

std::pair<Eigen::VectorXd, SwadReport> SwadState::finalize() const {
  if (!last_) throw ContractError("swad finalize called before any snapshot");

  SwadReport report;
  std::size_t first_block = 0;
  std::size_t last_block = blocks_.size();  // exclusive
  if (!losses_.empty()) {
    std::vector<double> values;
    values.reserve(losses_.size());
    for (const auto& [iter, loss] : losses_) values.push_back(loss);
    const SwadWindow w = schedule(values, cfg_);
    report.t_s = w.t_s;
    report.t_e = w.t_e;
    first_block = w.t_s;
    if (w.t_e < losses_.size()) last_block = std::min(last_block, w.t_e);
  } else {
    report.t_s = 0;
    report.t_e = 0;
  }
  report.iter_begin = static_cast<std::int64_t>(first_block) * cfg_.eval_interval;
  report.iter_end = last_block == blocks_.size() ? *last_iteration_ + 1
                                                 : static_cast<std::int64_t>(last_block) * cfg_.eval_interval;

  Eigen::VectorXd sum;
  std::int64_t count = 0;
  for (std::size_t k = first_block; k < last_block; ++k) {
    if (blocks_[k].count == 0) continue;
    if (count == 0) sum = blocks_[k].sum;
    else sum += blocks_[k].sum;
    count += blocks_[k].count;
  }
  report.n_snapshots = count;
  if (count == 0) {
    report.fallback_used = true;
    return {*last_, report};
  }
  if (count == 1) return {sum, report};
  return {sum / static_cast<double>(count), report};
}

}  // namespace silent
