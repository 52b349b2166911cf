#ifndef MCTM_DISTRIBUTION_HPP
#define MCTM_DISTRIBUTION_HPP

#include "mctm/basis.hpp"
#include "mctm/common.hpp"
#include "mctm/estimation.hpp"
#include "mctm/model.hpp"

#include <cstdint>
#include <vector>

namespace mctm {

/// Responses split into I (queried) and its complement Ic; 0-based, I non-empty.
struct IndexPartition {
  std::vector<int> I;
  std::vector<int> Ic;

  /// Validates I against {0, ..., dim-1} and fills the complement in increasing order.
  static IndexPartition of(std::vector<int> I, int dim);
};

/// Latent Gaussian scale of one response: z = h(y) for the normal reference,
/// z = sigma_j Phi^{-1}(F_Z(h(y))) otherwise. z ~ N(0, sigma_j^2) marginally.
struct LatentValue {
  double z = 0.0;
  double log_dz = 0.0;     // log dz/dy; -inf where the derivative is not positive
  bool clamped = false;    // y outside the support or F_Z saturated
};

LatentValue margin_latent(const FittedModel& model, int j, double y, ConstSpan x);

struct CdfResult {
  double value = 0.0;
  double error = 0.0;     // numerical error bound of the rectangle probability
  bool clamped = false;
};

struct DensityResult {
  double value = 0.0;
  double log_value = 0.0;
  bool feasible = true;   // false when some transformation derivative is not positive
  bool clamped = false;
};

/// P(Y <= y | x). Entries of y may be +-infinity.
CdfResult joint_cdf(const FittedModel& model, const Vector& y, ConstSpan x);
DensityResult joint_density(const FittedModel& model, const Vector& y, ConstSpan x);

struct MarginalResult {
  CdfResult cdf;
  DensityResult density;
};

/// Distribution of Y_I at y_I (ordered as partition.I).
MarginalResult marginal_distribution(const FittedModel& model, const IndexPartition& partition, const Vector& y_I,
                                     ConstSpan x);

/// Parameters of Z_I | Z_Ic = z_Ic on the latent scale.
struct ConditionalGaussian {
  Vector mean;
  Matrix cov;
};

/// Distribution of Y_I given Y_Ic = y_Ic at x.
class ConditionalDistribution {
 public:
  ConditionalDistribution(const FittedModel& model, IndexPartition partition, const Vector& y_Ic, Vector x);

  const ConditionalGaussian& gaussian() const { return gaussian_; }
  const IndexPartition& partition() const { return partition_; }

  DensityResult density(const Vector& y_I) const;
  CdfResult cdf(const Vector& y_I) const;

 private:
  FittedModel model_;  // parameters only, no covariance
  IndexPartition partition_;
  Vector x_;
  ConditionalGaussian gaussian_;
};

ConditionalDistribution conditional_distribution(const FittedModel& model, const IndexPartition& partition,
                                                 const Vector& y_Ic, ConstSpan x);

struct DependenceMeasures {
  double pearson = 0.0;   // latent correlation R[j, k]
  double spearman = 0.0;
  double kendall = 0.0;
  double lower_quantile = 0.0;  // lambda^L(q)
  double upper_quantile = 0.0;  // lambda^U(q)
  double lower_tail = 0.0;      // limits q -> 0 and q -> 1; zero for the Gaussian copula
  double upper_tail = 0.0;
};

DependenceMeasures dependence_measures(const FittedModel& model, ConstSpan x, int j, int k, double q = 0.05);
/// The same measures from a latent correlation r.
DependenceMeasures gaussian_copula_dependence(double r, double q = 0.05);

/// Entry (j, k) of the latent precision Lambda(x)' Lambda(x); zero iff Y_j and
/// Y_k are conditionally independent given the other responses.
double conditional_independence_test_stat(const FittedModel& model, ConstSpan x, int j, int k);

struct MomentResult {
  double value = 0.0;
  int clamped_nodes = 0;  // quadrature nodes beyond the transformation's range
};

/// E(Y_j^order | x), order 1 or 2, by 64-node Gauss-Hermite quadrature.
MomentResult marginal_moment(const FittedModel& model, int j, ConstSpan x, int order);

/// F_j(y | x).
double marginal_cdf(const FittedModel& model, int j, double y, ConstSpan x);

/// F_j^{-1}(p | x); clamped to the support when p is beyond the model's range.
Inversion marginal_quantile(const FittedModel& model, int j, ConstSpan x, double p);

struct SampleResult {
  RowMatrix Y;
  std::vector<int> failed_rows;  // inversion failed; the row holds NaN
  int clamped = 0;               // values clamped to a support endpoint
};

/// n draws; row i uses covariate row i of X (or row 0 when X has one row).
/// Deterministic given seed, independent of the thread count.
SampleResult sample(const FittedModel& model, int n, const RowMatrix& X, std::uint64_t seed);

}  // namespace mctm

#endif
