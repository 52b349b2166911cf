#ifndef MCTM_COMMON_HPP
#define MCTM_COMMON_HPP

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>

namespace mctm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Row-major storage so that a data row is a contiguous span.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ConstSpan = std::span<const double>;

inline ConstSpan as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline ConstSpan row_span(const RowMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Invalid model or basis configuration (bad supports, mismatched dimensions, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed user input (CSV, JSON documents, command-line values).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical inversion of a transformation failed (non-monotone transform).
class InversionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ill-conditioned or singular linear algebra (Fisher information, covariance blocks).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mctm

#endif
