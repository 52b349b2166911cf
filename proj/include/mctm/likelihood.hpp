#ifndef MCTM_LIKELIHOOD_HPP
#define MCTM_LIKELIHOOD_HPP

#include "mctm/common.hpp"
#include "mctm/dataset.hpp"
#include "mctm/model.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace mctm {

struct LikelihoodReport {
  /// Sum of l_i without the -J/2 log(2 pi) per-datum constant; -inf when infeasible.
  double loglik = 0.0;
  /// The omitted constant, -n J log(2 pi) / 2; loglik + log_constant is the full log-density.
  double log_constant = 0.0;
  Vector score;                   // empty unless requested
  std::optional<Matrix> fisher;   // observed information, when requested
  std::vector<int> infeasible_rows;  // rows with a non-positive transformation derivative
};

enum class Derivatives { None, Score, Fisher };

/// Log-likelihood of the standard-normal-reference model,
///   l_i = -1/2 sum_j (sum_{k<j} lambda_jk(x) h_k + h_j)^2 + sum_j log h_j'
/// with h_j = c_j(y_ij, x_i)' theta_j, and optionally its gradient and the
/// observed Fisher information (negative Hessian).
LikelihoodReport evaluate_likelihood(const ModelSpec& spec, const Vector& theta, const Dataset& data,
                                     Derivatives level = Derivatives::None);

double loglik(const ModelSpec& spec, const Vector& theta, const Dataset& data);
Vector score(const ModelSpec& spec, const Vector& theta, const Dataset& data);
Matrix fisher(const ModelSpec& spec, const Vector& theta, const Dataset& data);

/// Per-datum contributions l_i (same convention as loglik).
Vector loglik_contributions(const ModelSpec& spec, const Vector& theta, const Dataset& data);

double log_normalizing_constant(int n, int dim);

/// Full log-density (constants included) of a model with a non-normal
/// reference: latent z_j = sigma_j(x) Phi^{-1}(F_Z(h_j)), h = Lambda z ~ N(0, I).
/// Throws ConfigError for the standard-normal reference.
double loglik_alt_reference(const ModelSpec& spec, const Vector& theta, const Dataset& data,
                            int* clamped_values = nullptr);

/// Central differences with step 1e-6 (1 + |theta_i|).
Vector numeric_gradient(const std::function<double(const Vector&)>& f, const Vector& theta);
/// Symmetric central-difference Hessian from gradient differences.
Matrix numeric_hessian(const std::function<Vector(const Vector&)>& grad, const Vector& theta);

}  // namespace mctm

#endif
