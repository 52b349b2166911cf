#include "mctm/distribution.hpp"

#include "mctm/normal.hpp"
#include "mctm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace mctm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ConstSpan margin_params(const FittedModel& model, const ParamLayout& layout, int j) {
  return {model.theta.data() + layout.margin_offset(j), static_cast<std::size_t>(layout.margin_size(j))};
}

void check_index(const FittedModel& model, int j) {
  if (j < 0 || j >= model.spec.dim()) throw ConfigError("response index " + std::to_string(j) + " out of range");
}

void check_x(const FittedModel& model, ConstSpan x) {
  if (static_cast<int>(x.size()) < model.spec.required_covariates()) {
    throw ConfigError("covariate vector has " + std::to_string(x.size()) + " entries, the model needs " +
                      std::to_string(model.spec.required_covariates()));
  }
}

LatentValue latent_with_sd(const FittedModel& model, const ParamLayout& layout, int j, double y, ConstSpan x,
                           double sd) {
  LatentValue out;
  if (std::isinf(y)) {
    out.z = y;
    out.log_dz = -kInf;
    return out;
  }
  const ConditionalBasis& cb = model.spec.margin(j);
  out.clamped = !cb.response_basis().support().contains(y);
  const ConstSpan theta = margin_params(model, layout, j);
  const double h = cb.transform(theta, y, x);
  const double dh = cb.derivative(theta, y, x);
  const ReferenceDistribution& ref = model.spec.reference();
  const double log_dh = dh > 0.0 ? std::log(dh) : -kInf;
  if (ref.is_normal()) {
    out.z = h;
    out.log_dz = log_dh;
    return out;
  }
  bool saturated = false;
  const double w = ref.normal_score(h, &saturated);
  out.clamped = out.clamped || saturated;
  out.z = sd * w;
  out.log_dz = std::log(sd) + ref.log_density(h) + log_dh - std_normal_log_pdf(w);
  return out;
}

// Response value with latent value z (inverse of latent_with_sd).
Inversion latent_inverse(const FittedModel& model, const ParamLayout& layout, int j, double z, ConstSpan x,
                         double sd) {
  const ReferenceDistribution& ref = model.spec.reference();
  const double target = ref.is_normal() ? z : ref.quantile(std_normal_cdf(z / sd));
  return invert_monotone(model.spec.margin(j), margin_params(model, layout, j), x, target);
}

struct LatentVector {
  Vector z;
  double log_dz = 0.0;
  bool feasible = true;
  bool clamped = false;
};

LatentVector latent_vector(const FittedModel& model, const ParamLayout& layout, const std::vector<int>& idx,
                           const Vector& y, ConstSpan x, const CopulaSummary& cs) {
  LatentVector out;
  out.z.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const int j = idx[i];
    const LatentValue v = latent_with_sd(model, layout, j, y[static_cast<Eigen::Index>(i)], x,
                                         std::sqrt(cs.variances[j]));
    out.z[static_cast<Eigen::Index>(i)] = v.z;
    out.clamped = out.clamped || v.clamped;
    if (!std::isfinite(v.log_dz)) out.feasible = false;
    out.log_dz += v.log_dz;
  }
  return out;
}

Matrix submatrix(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(rows[r], cols[c]);
    }
  }
  return out;
}

std::vector<int> all_indices(int dim) {
  std::vector<int> v(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim; ++j) v[static_cast<std::size_t>(j)] = j;
  return v;
}

DensityResult make_density(double log_value, bool feasible, bool clamped) {
  if (!feasible || !std::isfinite(log_value)) return {0.0, -kInf, feasible, clamped};
  return {std::exp(log_value), log_value, true, clamped};
}

}  // namespace

IndexPartition IndexPartition::of(std::vector<int> I, int dim) {
  if (I.empty()) throw ConfigError("index set I must not be empty");
  std::vector<char> seen(static_cast<std::size_t>(dim), 0);
  for (int j : I) {
    if (j < 0 || j >= dim) throw ConfigError("index " + std::to_string(j) + " outside 0.." + std::to_string(dim - 1));
    if (seen[static_cast<std::size_t>(j)]) throw ConfigError("index " + std::to_string(j) + " repeated in I");
    seen[static_cast<std::size_t>(j)] = 1;
  }
  IndexPartition p{std::move(I), {}};
  for (int j = 0; j < dim; ++j) {
    if (!seen[static_cast<std::size_t>(j)]) p.Ic.push_back(j);
  }
  return p;
}

LatentValue margin_latent(const FittedModel& model, int j, double y, ConstSpan x) {
  check_index(model, j);
  check_x(model, x);
  const ParamLayout layout(model.spec);
  const CopulaSummary cs = sigma_from_lambda(assemble_lambda(model.spec, model.theta, x));
  return latent_with_sd(model, layout, j, y, x, std::sqrt(cs.variances[j]));
}

CdfResult joint_cdf(const FittedModel& model, const Vector& y, ConstSpan x) {
  check_x(model, x);
  if (y.size() != model.spec.dim()) throw ConfigError("response vector has the wrong length");
  const ParamLayout layout(model.spec);
  const CopulaSummary cs = sigma_from_lambda(assemble_lambda(model.spec, model.theta, x));
  const LatentVector lv = latent_vector(model, layout, all_indices(model.spec.dim()), y, x, cs);
  const MvnProbability p = mvn_cdf(lv.z, cs.sigma);
  return {p.value, p.error, lv.clamped};
}

DensityResult joint_density(const FittedModel& model, const Vector& y, ConstSpan x) {
  check_x(model, x);
  if (y.size() != model.spec.dim()) throw ConfigError("response vector has the wrong length");
  const ParamLayout layout(model.spec);
  const LambdaFactor lambda = assemble_lambda(model.spec, model.theta, x);
  const CopulaSummary cs = sigma_from_lambda(lambda);
  const LatentVector lv = latent_vector(model, layout, all_indices(model.spec.dim()), y, x, cs);
  if (!lv.feasible || !lv.z.allFinite()) return make_density(-kInf, lv.feasible, lv.clamped);
  const Vector h = lambda.matrix() * lv.z;
  double log_value = lv.log_dz;
  for (Eigen::Index j = 0; j < h.size(); ++j) log_value += std_normal_log_pdf(h[j]);
  return make_density(log_value, true, lv.clamped);
}

MarginalResult marginal_distribution(const FittedModel& model, const IndexPartition& partition, const Vector& y_I,
                                     ConstSpan x) {
  check_x(model, x);
  if (y_I.size() != static_cast<Eigen::Index>(partition.I.size())) throw ConfigError("y_I has the wrong length");
  const ParamLayout layout(model.spec);
  const CopulaSummary cs = sigma_from_lambda(assemble_lambda(model.spec, model.theta, x));
  const LatentVector lv = latent_vector(model, layout, partition.I, y_I, x, cs);
  const Matrix s = submatrix(cs.sigma, partition.I, partition.I);
  const MvnProbability p = mvn_cdf(lv.z, s);
  MarginalResult out;
  out.cdf = {p.value, p.error, lv.clamped};
  if (!lv.feasible || !lv.z.allFinite()) {
    out.density = make_density(-kInf, lv.feasible, lv.clamped);
  } else {
    out.density = make_density(mvn_log_density(lv.z, Vector::Zero(lv.z.size()), s) + lv.log_dz, true, lv.clamped);
  }
  return out;
}

ConditionalDistribution::ConditionalDistribution(const FittedModel& model, IndexPartition partition,
                                                 const Vector& y_Ic, Vector x)
    : model_(model_at(model.spec, model.theta)), partition_(std::move(partition)), x_(std::move(x)) {
  const ConstSpan xs = as_span(x_);
  check_x(model_, xs);
  if (y_Ic.size() != static_cast<Eigen::Index>(partition_.Ic.size())) throw ConfigError("y_Ic has the wrong length");
  const ParamLayout layout(model_.spec);
  const CopulaSummary cs = sigma_from_lambda(assemble_lambda(model_.spec, model_.theta, xs));
  const Matrix s_i = submatrix(cs.sigma, partition_.I, partition_.I);
  if (partition_.Ic.empty()) {
    gaussian_ = {Vector::Zero(s_i.rows()), s_i};
    return;
  }
  const LatentVector lv = latent_vector(model_, layout, partition_.Ic, y_Ic, xs, cs);
  if (!lv.z.allFinite()) throw ConfigError("conditioning values must be finite");
  const Matrix s_c = submatrix(cs.sigma, partition_.Ic, partition_.Ic);
  const Matrix s_ic = submatrix(cs.sigma, partition_.I, partition_.Ic);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s_c, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  if (!(ev[0] > 1e-12 * ev[ev.size() - 1])) {
    throw NumericalError("covariance of the conditioning responses is nearly singular");
  }
  const Eigen::LLT<Matrix> llt(s_c);
  gaussian_.mean = s_ic * llt.solve(lv.z);
  gaussian_.cov = s_i - s_ic * llt.solve(s_ic.transpose());
  gaussian_.cov = 0.5 * (gaussian_.cov + gaussian_.cov.transpose()).eval();
}

DensityResult ConditionalDistribution::density(const Vector& y_I) const {
  if (y_I.size() != static_cast<Eigen::Index>(partition_.I.size())) throw ConfigError("y_I has the wrong length");
  const ConstSpan xs = as_span(x_);
  const ParamLayout layout(model_.spec);
  const CopulaSummary cs = sigma_from_lambda(assemble_lambda(model_.spec, model_.theta, xs));
  const LatentVector lv = latent_vector(model_, layout, partition_.I, y_I, xs, cs);
  if (!lv.feasible || !lv.z.allFinite()) return make_density(-kInf, lv.feasible, lv.clamped);
  return make_density(mvn_log_density(lv.z, gaussian_.mean, gaussian_.cov) + lv.log_dz, true, lv.clamped);
}

CdfResult ConditionalDistribution::cdf(const Vector& y_I) const {
  if (y_I.size() != static_cast<Eigen::Index>(partition_.I.size())) throw ConfigError("y_I has the wrong length");
  const ConstSpan xs = as_span(x_);
  const ParamLayout layout(model_.spec);
  const CopulaSummary cs = sigma_from_lambda(assemble_lambda(model_.spec, model_.theta, xs));
  const LatentVector lv = latent_vector(model_, layout, partition_.I, y_I, xs, cs);
  const MvnProbability p = mvn_cdf(lv.z - gaussian_.mean, gaussian_.cov);
  return {p.value, p.error, lv.clamped};
}

ConditionalDistribution conditional_distribution(const FittedModel& model, const IndexPartition& partition,
                                                 const Vector& y_Ic, ConstSpan x) {
  Vector xv(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) xv[static_cast<Eigen::Index>(i)] = x[i];
  return ConditionalDistribution(model, partition, y_Ic, std::move(xv));
}

DependenceMeasures gaussian_copula_dependence(double r, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile level q must lie in (0, 1)");
  DependenceMeasures d;
  d.pearson = r;
  d.spearman = 6.0 / std::numbers::pi * std::asin(r / 2.0);
  d.kendall = 2.0 / std::numbers::pi * std::asin(r);
  const double zq = std_normal_quantile(q);
  const double c = bivariate_normal_cdf(zq, zq, r);
  d.lower_quantile = c / q;
  d.upper_quantile = (1.0 - 2.0 * q + c) / (1.0 - q);
  return d;
}

DependenceMeasures dependence_measures(const FittedModel& model, ConstSpan x, int j, int k, double q) {
  check_index(model, j);
  check_index(model, k);
  check_x(model, x);
  const CopulaSummary cs = sigma_from_lambda(assemble_lambda(model.spec, model.theta, x));
  return gaussian_copula_dependence(cs.correlation(j, k), q);
}

double conditional_independence_test_stat(const FittedModel& model, ConstSpan x, int j, int k) {
  check_index(model, j);
  check_index(model, k);
  check_x(model, x);
  return assemble_lambda(model.spec, model.theta, x).precision()(j, k);
}

MomentResult marginal_moment(const FittedModel& model, int j, ConstSpan x, int order) {
  check_index(model, j);
  check_x(model, x);
  if (order != 1 && order != 2) throw ConfigError("moment order must be 1 or 2");
  static const QuadratureRule rule = gauss_hermite_normal(64);
  const ParamLayout layout(model.spec);
  const CopulaSummary cs = sigma_from_lambda(assemble_lambda(model.spec, model.theta, x));
  const double sd = std::sqrt(cs.variances[j]);
  MomentResult out;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    const Inversion inv = latent_inverse(model, layout, j, sd * rule.nodes[i], x, sd);
    if (inv.clamped) ++out.clamped_nodes;
    out.value += rule.weights[i] * (order == 1 ? inv.y : inv.y * inv.y);
  }
  return out;
}

double marginal_cdf(const FittedModel& model, int j, double y, ConstSpan x) {
  check_index(model, j);
  check_x(model, x);
  const ParamLayout layout(model.spec);
  const CopulaSummary cs = sigma_from_lambda(assemble_lambda(model.spec, model.theta, x));
  const double sd = std::sqrt(cs.variances[j]);
  return std_normal_cdf(latent_with_sd(model, layout, j, y, x, sd).z / sd);
}

Inversion marginal_quantile(const FittedModel& model, int j, ConstSpan x, double p) {
  check_index(model, j);
  check_x(model, x);
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("probability must lie in (0, 1)");
  const ParamLayout layout(model.spec);
  const CopulaSummary cs = sigma_from_lambda(assemble_lambda(model.spec, model.theta, x));
  const double sd = std::sqrt(cs.variances[j]);
  return latent_inverse(model, layout, j, sd * std_normal_quantile(p), x, sd);
}

SampleResult sample(const FittedModel& model, int n, const RowMatrix& X, std::uint64_t seed) {
  if (n < 0) throw ConfigError("sample size must be non-negative");
  if (X.rows() != n && X.rows() != 1 && !(X.rows() == 0 && X.cols() == 0)) {
    throw ConfigError("covariate matrix must have n rows or a single row");
  }
  const int j_dim = model.spec.dim();
  const ParamLayout layout(model.spec);
  SampleResult out;
  out.Y = RowMatrix(n, j_dim);
  std::vector<char> failed(static_cast<std::size_t>(n), 0);
  std::vector<int> clamped(static_cast<std::size_t>(n), 0);
  parallel_for(n, [&](int i) {
    const ConstSpan x = X.rows() == 0 ? ConstSpan{} : row_span(X, X.rows() == 1 ? 0 : i);
    check_x(model, x);
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    std::normal_distribution<double> normal;
    Vector z(j_dim);
    for (int j = 0; j < j_dim; ++j) z[j] = normal(rng);
    const LambdaFactor lambda = assemble_lambda(model.spec, model.theta, x);
    const CopulaSummary cs = sigma_from_lambda(lambda);
    const Vector zt = lambda.solve(z);
    for (int j = 0; j < j_dim; ++j) {
      try {
        const Inversion inv = latent_inverse(model, layout, j, zt[j], x, std::sqrt(cs.variances[j]));
        out.Y(i, j) = inv.y;
        if (inv.clamped) ++clamped[static_cast<std::size_t>(i)];
      } catch (const InversionError&) {
        out.Y(i, j) = std::numeric_limits<double>::quiet_NaN();
        failed[static_cast<std::size_t>(i)] = 1;
      }
    }
  });
  for (int i = 0; i < n; ++i) {
    if (failed[static_cast<std::size_t>(i)]) out.failed_rows.push_back(i);
    out.clamped += clamped[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace mctm
