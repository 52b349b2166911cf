#ifndef MCTM_TESTS_FIXTURES_HPP
#define MCTM_TESTS_FIXTURES_HPP

// Independent oracles and random model instances shared by the unit tests
// and the acceptance runner. Nothing here calls into the library's own
// numerics except to build specs and evaluate the function under test.

#include "mctm/basis.hpp"
#include "mctm/dataset.hpp"
#include "mctm/estimation.hpp"
#include "mctm/model.hpp"

#include <functional>
#include <random>
#include <vector>

namespace mctm::testing {

/// M=1 Bernstein on [lo, hi] with theta = (lo, hi) is the identity map.
ConditionalBasis identity_margin(double lo = -20.0, double hi = 20.0);
Vector identity_theta(int dim, double lo = -20.0, double hi = 20.0);

/// Identity margins, constant lambda entries taken from the strict lower triangle of L.
FittedModel gaussian_model(const Matrix& L, double lo = -20.0, double hi = 20.0);

/// Bernstein coefficients (order `order`, support [lo, hi]) interpolating f at
/// equispaced points; exact for polynomials of degree <= order.
Vector bernstein_interpolate(const std::function<double(double)>& f, int order, double lo, double hi);

/// C(M, m) u^m (1 - u)^(M - m) in exact rational arithmetic, u = (y - lo) / (hi - lo).
double rational_bernstein(int M, int m, double y, double lo, double hi);

/// Bivariate normal log-density written out from the 2x2 formula.
double bvn_log_density(double y1, double y2, const Matrix& sigma);
/// P(X <= h, Y <= k) for unit variances and correlation r, by 1-d adaptive quadrature.
double bvn_cdf_quadrature(double h, double k, double r);

/// Composite Simpson rule with n (even) intervals.
double simpson(const std::function<double(double)>& f, double a, double b, int n);
/// Simpson product rule over a rectangle.
double simpson2(const std::function<double(double, double)>& f, double a1, double b1, double a2, double b2, int n);

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double rel_step = 1e-6);
/// Hessian from second differences of function values.
Matrix fd_hessian(const std::function<double(const Vector&)>& f, const Vector& x, double rel_step = 1e-4);

/// max_i |a_i - b_i| / max(|b_i|, floor).
double max_rel_error(const Matrix& a, const Matrix& b, double floor = 1.0);

/// A random feasible (spec, theta, data) triple: J in {1, 2, 3}, margins mixing
/// unconditional, shift and response-varying (linear or Bernstein) terms,
/// lambda entries constant, linear or Bernstein in the covariates.
struct Instance {
  ModelSpec spec;
  Vector theta;
  Dataset data;
};
Instance random_instance(std::mt19937_64& rng, int n, int index);

/// Sample correlation of two columns.
double pearson(const Vector& a, const Vector& b);

}  // namespace mctm::testing

#endif
