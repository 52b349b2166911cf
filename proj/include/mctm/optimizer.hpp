#ifndef MCTM_OPTIMIZER_HPP
#define MCTM_OPTIMIZER_HPP

#include "mctm/common.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace mctm {

/// Minimise f(x) subject to A x >= b.
///
/// `objective` returns f(x) and, when `grad` is non-null, writes the gradient.
/// It may return +inf outside the domain of f; line searches back off.
struct ConstrainedProblem {
  std::function<double(const Vector& x, Vector* grad)> objective;
  Matrix A;
  Vector b;
};

struct OptimizerOptions {
  int max_outer = 100;
  int max_inner = 2000;
  double grad_tol = 1e-6;        // on the gradient of the Lagrangian, infinity norm
  double violation_tol = 1e-9;   // max(b - A x)
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double max_penalty = 1e12;
};

struct OptimizerResult {
  Vector x;
  double value = 0.0;
  Vector multipliers;             // one per constraint row, >= 0
  bool converged = false;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double lagrangian_gradient = 0.0;
  double max_violation = 0.0;
  /// Augmented Lagrangian at the start and end of every outer iteration.
  std::vector<std::pair<double, double>> outer_progress;
  std::string message;
};

/// Powell-Hestenes-Rockafellar augmented Lagrangian with a BFGS inner solver
/// (weak Wolfe bisection line search). `x0` must have finite f.
OptimizerResult minimize_augmented_lagrangian(const ConstrainedProblem& problem, const Vector& x0,
                                              const OptimizerOptions& options = {});

}  // namespace mctm

#endif
