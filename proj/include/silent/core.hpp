#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace silent {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Label = int;  // always +1 or -1

enum class Domain { train, test };

inline const char* to_string(Domain d) { return d == Domain::train ? "train" : "test"; }

// Error taxonomy. Each carries a short machine-readable kind for the CLI's error list.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

struct ContractError : Error {
  explicit ContractError(const std::string& what) : Error("contract", what) {}
};

struct ProtocolError : Error {
  explicit ProtocolError(const std::string& what) : Error("protocol", what) {}
};

struct TrainingError : Error {
  TrainingError(const std::string& what, std::int64_t iteration)
      : Error("training", what + " at iteration " + std::to_string(iteration)), iteration_(iteration) {}
  std::int64_t iteration() const noexcept { return iteration_; }

 private:
  std::int64_t iteration_;
};

}  // namespace silent
