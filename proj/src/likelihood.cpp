#include "mctm/likelihood.hpp"

#include "mctm/normal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mctm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Evaluates bases, transforms and Lambda entries for one datum into reusable buffers.
class DatumWorkspace {
 public:
  DatumWorkspace(const ModelSpec& spec, const ParamLayout& layout)
      : spec_(spec),
        layout_(layout),
        c_(layout.size()),
        dc_(layout.size()),
        b_(layout.size()),
        h_(spec.dim()),
        dh_(spec.dim()),
        z_(spec.dim()),
        lambda_(Matrix::Identity(spec.dim(), spec.dim())) {}

  // Returns false when some transformation derivative is non-positive.
  bool load(const Vector& theta, ConstSpan y, ConstSpan x) {
    const int j_dim = spec_.dim();
    bool feasible = true;
    for (int j = 0; j < j_dim; ++j) {
      const int off = layout_.margin_offset(j);
      const auto sz = static_cast<std::size_t>(layout_.margin_size(j));
      spec_.margin(j).eval_into(y[j], x, {c_.data() + off, sz}, {dc_.data() + off, sz});
      h_[j] = c_.segment(off, static_cast<Eigen::Index>(sz)).dot(theta.segment(off, static_cast<Eigen::Index>(sz)));
      dh_[j] = dc_.segment(off, static_cast<Eigen::Index>(sz)).dot(theta.segment(off, static_cast<Eigen::Index>(sz)));
      if (!(dh_[j] > 0.0)) feasible = false;
    }
    for (const auto& t : spec_.lambda_terms()) {
      if (t.fixed_zero) continue;
      const int off = layout_.lambda_offset(t.row, t.col);
      const auto sz = static_cast<std::size_t>(t.basis.size());
      t.basis.eval_into(x, {b_.data() + off, sz});
      lambda_(t.row, t.col) =
          b_.segment(off, static_cast<Eigen::Index>(sz)).dot(theta.segment(off, static_cast<Eigen::Index>(sz)));
    }
    for (int j = 0; j < j_dim; ++j) {
      double s = h_[j];
      for (int k = 0; k < j; ++k) s += lambda_(j, k) * h_[k];
      z_[j] = s;
    }
    return feasible;
  }

  double contribution() const {
    double l = -0.5 * z_.squaredNorm();
    for (int j = 0; j < spec_.dim(); ++j) l += std::log(dh_[j]);
    return l;
  }

  void add_score(Vector& grad) const {
    const int j_dim = spec_.dim();
    for (int k = 0; k < j_dim; ++k) {
      double s = -z_[k];
      for (int j = k + 1; j < j_dim; ++j) s -= z_[j] * lambda_(j, k);
      const int off = layout_.margin_offset(k);
      const int sz = layout_.margin_size(k);
      grad.segment(off, sz) += s * c_.segment(off, sz) + dc_.segment(off, sz) / dh_[k];
    }
    for (const auto& t : spec_.lambda_terms()) {
      if (t.fixed_zero) continue;
      const int off = layout_.lambda_offset(t.row, t.col);
      const int sz = t.basis.size();
      grad.segment(off, sz) += (-z_[t.row] * h_[t.col]) * b_.segment(off, sz);
    }
  }

  // Adds -d^2 l_i / d theta d theta' to the lower triangle of `info`.
  void add_fisher(Matrix& info, Matrix& g) const {
    const int j_dim = spec_.dim();
    g.setZero();
    // Column j of g is the gradient of z_j.
    for (int j = 0; j < j_dim; ++j) {
      for (int l = 0; l <= j; ++l) {
        const double lam = l == j ? 1.0 : lambda_(j, l);
        const int off = layout_.margin_offset(l);
        const int sz = layout_.margin_size(l);
        g.col(j).segment(off, sz) = lam * c_.segment(off, sz);
      }
      for (int k = 0; k < j; ++k) {
        const int off = layout_.lambda_offset(j, k);
        if (off < 0) continue;
        const int sz = layout_.lambda_size(j, k);
        g.col(j).segment(off, sz) = h_[k] * b_.segment(off, sz);
      }
    }
    info.selfadjointView<Eigen::Lower>().rankUpdate(g);
    // z_j times the Hessian of z_j: cross terms gamma_jk x theta_k.
    for (const auto& t : spec_.lambda_terms()) {
      if (t.fixed_zero) continue;
      const int goff = layout_.lambda_offset(t.row, t.col);
      const int gsz = t.basis.size();
      const int toff = layout_.margin_offset(t.col);
      const int tsz = layout_.margin_size(t.col);
      // gamma blocks come after all theta blocks, so this lands in the lower triangle.
      info.block(goff, toff, gsz, tsz).noalias() +=
          z_[t.row] * b_.segment(goff, gsz) * c_.segment(toff, tsz).transpose();
    }
    for (int k = 0; k < j_dim; ++k) {
      const int off = layout_.margin_offset(k);
      const int sz = layout_.margin_size(k);
      info.block(off, off, sz, sz).selfadjointView<Eigen::Lower>().rankUpdate(dc_.segment(off, sz),
                                                                             1.0 / (dh_[k] * dh_[k]));
    }
  }

  const Vector& h() const { return h_; }
  const Vector& dh() const { return dh_; }
  const Matrix& lambda() const { return lambda_; }

 private:
  const ModelSpec& spec_;
  const ParamLayout& layout_;
  Vector c_;
  Vector dc_;
  Vector b_;
  Vector h_;
  Vector dh_;
  Vector z_;
  Matrix lambda_;
};

void check_inputs(const ModelSpec& spec, const ParamLayout& layout, const Vector& theta, const Dataset& data) {
  if (theta.size() != layout.size()) throw ConfigError("parameter vector length does not match the model layout");
  if (data.dim() != spec.dim()) throw ConfigError("dataset and model have different response dimensions");
  if (data.covariates() < spec.required_covariates()) throw ConfigError("dataset has too few covariate columns");
}

}  // namespace

double log_normalizing_constant(int n, int dim) {
  return -0.5 * static_cast<double>(n) * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi);
}

LikelihoodReport evaluate_likelihood(const ModelSpec& spec, const Vector& theta, const Dataset& data,
                                     Derivatives level) {
  if (!spec.reference().is_normal()) {
    throw ConfigError("analytic likelihood derivatives need the standard-normal reference");
  }
  const ParamLayout layout(spec);
  check_inputs(spec, layout, theta, data);
  DatumWorkspace ws(spec, layout);

  LikelihoodReport report;
  report.log_constant = log_normalizing_constant(data.n(), data.dim());
  if (level != Derivatives::None) report.score = Vector::Zero(layout.size());
  Matrix info;
  Matrix g;
  if (level == Derivatives::Fisher) {
    info = Matrix::Zero(layout.size(), layout.size());
    g = Matrix::Zero(layout.size(), spec.dim());
  }

  double total = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    if (!ws.load(theta, data.response_row(i), data.covariate_row(i))) {
      report.infeasible_rows.push_back(i);
      continue;
    }
    total += ws.contribution();
    if (level != Derivatives::None) ws.add_score(report.score);
    if (level == Derivatives::Fisher) ws.add_fisher(info, g);
  }
  if (!report.infeasible_rows.empty()) {
    report.loglik = kNegInf;
    return report;
  }
  report.loglik = total;
  if (level == Derivatives::Fisher) {
    info.triangularView<Eigen::StrictlyUpper>() = info.transpose();
    report.fisher = std::move(info);
  }
  return report;
}

double loglik(const ModelSpec& spec, const Vector& theta, const Dataset& data) {
  return evaluate_likelihood(spec, theta, data, Derivatives::None).loglik;
}

Vector score(const ModelSpec& spec, const Vector& theta, const Dataset& data) {
  LikelihoodReport r = evaluate_likelihood(spec, theta, data, Derivatives::Score);
  if (!r.infeasible_rows.empty()) throw NumericalError("score undefined: transformation derivative is not positive");
  return r.score;
}

Matrix fisher(const ModelSpec& spec, const Vector& theta, const Dataset& data) {
  LikelihoodReport r = evaluate_likelihood(spec, theta, data, Derivatives::Fisher);
  if (!r.infeasible_rows.empty()) throw NumericalError("Fisher information undefined: transformation derivative is not positive");
  return *r.fisher;
}

Vector loglik_contributions(const ModelSpec& spec, const Vector& theta, const Dataset& data) {
  const ParamLayout layout(spec);
  check_inputs(spec, layout, theta, data);
  DatumWorkspace ws(spec, layout);
  Vector out(data.n());
  for (int i = 0; i < data.n(); ++i) {
    out[i] = ws.load(theta, data.response_row(i), data.covariate_row(i)) ? ws.contribution() : kNegInf;
  }
  return out;
}

double loglik_alt_reference(const ModelSpec& spec, const Vector& theta, const Dataset& data, int* clamped_values) {
  const ReferenceDistribution& ref = spec.reference();
  if (ref.is_normal()) throw ConfigError("loglik_alt_reference expects a logistic or minimum-extreme-value reference");
  const ParamLayout layout(spec);
  check_inputs(spec, layout, theta, data);
  DatumWorkspace ws(spec, layout);
  const int j_dim = spec.dim();
  const double log_sqrt_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  int clamped = 0;
  double total = 0.0;
  Vector zt(j_dim);
  for (int i = 0; i < data.n(); ++i) {
    if (!ws.load(theta, data.response_row(i), data.covariate_row(i))) {
      if (clamped_values) *clamped_values = clamped;
      return kNegInf;
    }
    const LambdaFactor lam(ws.lambda());
    const CopulaSummary cs = sigma_from_lambda(lam);
    double l = 0.0;
    for (int j = 0; j < j_dim; ++j) {
      bool c = false;
      const double w = ref.normal_score(ws.h()[j], &c);
      if (c) ++clamped;
      const double sd = std::sqrt(cs.variances[j]);
      zt[j] = sd * w;
      l += std::log(sd) + ref.log_density(ws.h()[j]) + std::log(ws.dh()[j]) - std_normal_log_pdf(w);
    }
    const Matrix& lm = ws.lambda();
    for (int j = 0; j < j_dim; ++j) {
      double hj = zt[j];
      for (int k = 0; k < j; ++k) hj += lm(j, k) * zt[k];
      l += -0.5 * hj * hj - log_sqrt_2pi;
    }
    total += l;
  }
  if (clamped_values) *clamped_values = clamped;
  return total;
}

Vector numeric_gradient(const std::function<double(const Vector&)>& f, const Vector& theta) {
  Vector grad(theta.size());
  Vector t = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(theta[i]));
    t[i] = theta[i] + h;
    const double up = f(t);
    t[i] = theta[i] - h;
    const double down = f(t);
    t[i] = theta[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

Matrix numeric_hessian(const std::function<Vector(const Vector&)>& grad, const Vector& theta) {
  const Eigen::Index p = theta.size();
  Matrix hess(p, p);
  Vector t = theta;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double h = 1e-5 * (1.0 + std::abs(theta[i]));
    t[i] = theta[i] + h;
    const Vector up = grad(t);
    t[i] = theta[i] - h;
    const Vector down = grad(t);
    t[i] = theta[i];
    hess.col(i) = (up - down) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace mctm
