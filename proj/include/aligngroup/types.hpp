#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace aligngroup {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = std::int64_t;

// Thrown on malformed inputs (files, configs, ids out of range).
struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a forward/backward pass or an optimizer step produces a
// non-finite value; the message names the offending tensor.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw LoadError(msg);
}

}  // namespace aligngroup
