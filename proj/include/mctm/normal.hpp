#ifndef MCTM_NORMAL_HPP
#define MCTM_NORMAL_HPP

#include "mctm/common.hpp"

#include <cstdint>

namespace mctm {

double std_normal_pdf(double z);
double std_normal_log_pdf(double z);
double std_normal_cdf(double z);
double std_normal_quantile(double p);

/// P(X <= h, Y <= k) for standard bivariate normal with correlation r.
///
/// Drezner-Wesolowsky type Gauss-Legendre evaluation of the Plackett
/// integral as published by A. Genz; accurate to about 1e-15.
double bivariate_normal_cdf(double h, double k, double r);

struct MvnProbability {
  double value = 0.0;
  double error = 0.0;  // 3 standard errors over the randomised shifts (0 when exact)
};

/// P(Z <= upper) for Z ~ N(0, cov). Entries of `upper` may be +-infinity.
///
/// Dimensions 1 and 2 are evaluated directly. Higher dimensions use the
/// separation-of-variables transform with a randomly shifted Richtmyer
/// lattice (10 shifts of points/10 each) from a fixed seed, so repeated calls
/// return identical values.
MvnProbability mvn_cdf(const Vector& upper, const Matrix& cov, int points = 100000,
                       std::uint64_t seed = 0x5eed);

/// Log-density of N(mean, cov) at z.
double mvn_log_density(const Vector& z, const Vector& mean, const Matrix& cov);

/// Gauss-Hermite rule for integrals against the standard normal density:
/// E f(Z) ~= sum_i w_i f(x_i), weights summing to one.
struct QuadratureRule {
  Vector nodes;
  Vector weights;
};
QuadratureRule gauss_hermite_normal(int n);

}  // namespace mctm

#endif
