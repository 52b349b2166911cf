#ifndef MCTM_ESTIMATION_HPP
#define MCTM_ESTIMATION_HPP

#include "mctm/common.hpp"
#include "mctm/dataset.hpp"
#include "mctm/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mctm {

struct FitOptions {
  int max_outer_iterations = 100;
  int max_inner_iterations = 2000;
  /// Infinity norm of the per-observation Lagrangian gradient.
  double gradient_tolerance = 1e-6;
  double constraint_tolerance = 1e-9;
  double penalty_growth = 10.0;
  /// Constraints D theta > 0 are enforced as D theta >= slack.
  double slack = 1e-8;
  /// Random restarts from jittered starting values; the best fit is kept.
  int restarts = 0;
  std::uint64_t seed = 1;
  bool compute_vcov = true;
  /// Starting values; computed by initial_values() when empty.
  std::optional<Vector> start;

  void validate() const;
};

struct FitDiagnostics {
  bool converged = false;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double lagrangian_gradient = 0.0;  // per observation
  double max_violation = 0.0;
  double min_slack = 0.0;            // min over rows of D theta
  std::vector<std::string> active_constraints;
  std::vector<std::pair<double, double>> outer_progress;  // penalised log-likelihood per observation
  std::vector<std::string> warnings;
  std::string message;
};

struct FittedModel {
  ModelSpec spec;
  Vector theta;
  Matrix vcov;  // empty when not computed or the information is singular
  double loglik = 0.0;        // without the normalising constant (normal reference)
  double log_constant = 0.0;  // add to loglik for the full log-likelihood
  int n_obs = 0;
  FitDiagnostics diagnostics;

  bool converged() const { return diagnostics.converged; }
  double full_loglik() const { return loglik + log_constant; }
  /// sqrt(diag(vcov)); throws if vcov is empty.
  Vector standard_errors() const;
};

/// A model at given parameters (no fit, no covariance), e.g. for known truths.
FittedModel model_at(const ModelSpec& spec, Vector theta);

/// Starting values: margin blocks from separate univariate fits, gamma = 0.
/// A margin whose fit fails falls back to the probit-of-ECDF heuristic.
Vector initial_values(const ModelSpec& spec, const Dataset& data);

/// theta_j from the normal (or reference) quantiles of the empirical CDF at
/// M+1 equispaced anchors, made strictly increasing; other entries zero.
Vector heuristic_values(const ModelSpec& spec, const Dataset& data);

/// Constrained maximum likelihood. Rows are put in canonical order first.
FittedModel fit(const ModelSpec& spec, const Dataset& data, const FitOptions& options = {});

/// Inverse observed Fisher information at the estimate. Throws NumericalError
/// naming the weakest parameter directions when the condition number exceeds 1e12.
Matrix asymptotic_covariance(const FittedModel& fitted, const Dataset& data);

/// Observed information: analytic for the normal reference, finite differences otherwise.
Matrix observed_information(const ModelSpec& spec, const Vector& theta, const Dataset& data);

}  // namespace mctm

#endif
