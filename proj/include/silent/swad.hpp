#pragma once

#include "silent/core.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace silent {

/// Dense weight averaging with an overfit-aware window.
struct SwadConfig {
  double r = 0.1;                  // loss tolerance for the end-of-window test
  std::int64_t eval_interval = 10; // iterations between validation evaluations
  std::int64_t n_s = 3;            // look-ahead window for the start test

  void validate() const {
    if (!(r >= 0)) throw ConfigError("swad r must be >= 0");
    if (eval_interval < 1) throw ConfigError("swad eval_interval must be >= 1");
    if (n_s < 1) throw ConfigError("swad n_s must be >= 1");
  }
};

/// Half-open window [t_s, t_e) over evaluation indices.
struct SwadWindow {
  std::size_t t_s = 0;
  std::size_t t_e = 0;
};

/// Start: first index whose loss equals the minimum of the next n_s losses
/// (window truncated at the end). End: first later index whose loss exceeds
/// (1 + r) times the running minimum, or the sequence length.
SwadWindow schedule(std::span<const double> losses, const SwadConfig& cfg);

struct SwadReport {
  std::size_t t_s = 0;
  std::size_t t_e = 0;
  std::int64_t iter_begin = 0;  // first averaged iteration
  std::int64_t iter_end = 0;    // one past the last averaged iteration
  std::int64_t n_snapshots = 0;
  bool fallback_used = false;
};

/// Running state of one averaging run.
///
/// Evaluation k summarizes the block of iterations [k*I, (k+1)*I), I being the
/// evaluation interval, so a window over evaluations maps onto whole blocks.
/// Snapshots are buffered as per-block sums until the window is known; when
/// the window runs to the last evaluation, iterations after it are included.
/// With no recorded losses every snapshot is averaged.
class SwadState {
 public:
  explicit SwadState(SwadConfig cfg);

  const SwadConfig& config() const { return cfg_; }

  /// Iterations must be strictly increasing.
  void accumulate(std::int64_t iteration, const Eigen::VectorXd& params);

  /// Validation loss measured after `iteration`.
  void record_loss(std::int64_t iteration, double loss);

  const std::vector<std::pair<std::int64_t, double>>& loss_history() const { return losses_; }
  bool empty() const { return !last_.has_value(); }

  /// Arithmetic mean of the snapshots inside the window; the last snapshot
  /// (flagged as fallback) when the window holds none.
  std::pair<Eigen::VectorXd, SwadReport> finalize() const;

 private:
  struct Block {
    Eigen::VectorXd sum;
    std::int64_t count = 0;
  };

  SwadConfig cfg_;
  std::vector<Block> blocks_;
  std::vector<std::pair<std::int64_t, double>> losses_;
  std::optional<std::int64_t> last_iteration_;
  std::optional<Eigen::VectorXd> last_;
};

}  // namespace silent
