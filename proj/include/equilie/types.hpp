#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace equilie {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// A requested computation would exceed a configured size cap.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Candidate irreps do not exhaust a representation.
class DecompositionIncompleteError : public std::runtime_error {
 public:
  DecompositionIncompleteError(const std::string& what, int residual_dim)
      : std::runtime_error(what), residual_dim_(residual_dim) {}
  int residual_dim() const noexcept { return residual_dim_; }

 private:
  int residual_dim_;
};

// A model or pipeline was configured inconsistently (missing tables, bad shapes).
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A coupling table was required but is neither cached nor allowed to be computed.
class MissingCouplingError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace equilie
