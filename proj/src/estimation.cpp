#include "mctm/estimation.hpp"

#include "mctm/likelihood.hpp"
#include "mctm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace mctm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double empirical_cdf(const std::vector<double>& sorted, double t) {
  const auto count = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
  const double n = static_cast<double>(sorted.size());
  return std::clamp(static_cast<double>(count) / (n + 1.0), 1.0 / (n + 1.0), n / (n + 1.0));
}

// Pushes theta into {A theta >= slack} for difference-type rows (one +1 entry).
void repair_monotone(const Matrix& a, double slack, Vector& theta) {
  for (int pass = 0; pass < 3; ++pass) {
    bool changed = false;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      const double v = a.row(r).dot(theta);
      if (v >= slack) continue;
      Eigen::Index up = 0;
      a.row(r).maxCoeff(&up);
      theta[up] += (slack - v) / a(r, up) * (1.0 + 1e-12) + 1e-15;
      changed = true;
    }
    if (!changed) return;
  }
}

double scaled_negative_loglik(const ModelSpec& spec, const Dataset& data, const Vector& theta, Vector* grad) {
  const double n = data.n();
  if (spec.reference().is_normal()) {
    const LikelihoodReport r =
        evaluate_likelihood(spec, theta, data, grad ? Derivatives::Score : Derivatives::None);
    if (!std::isfinite(r.loglik)) return kInf;
    if (grad) *grad = -r.score / n;
    return -r.loglik / n;
  }
  const auto f = [&](const Vector& t) { return -loglik_alt_reference(spec, t, data) / n; };
  const double value = f(theta);
  if (!std::isfinite(value)) return kInf;
  if (grad) {
    *grad = numeric_gradient(f, theta);
    if (!grad->allFinite()) return kInf;
  }
  return value;
}

std::string describe_constraint(const ParamLayout& layout, const Matrix& a, Eigen::Index r) {
  Eigen::Index up = 0;
  Eigen::Index down = 0;
  a.row(r).maxCoeff(&up);
  a.row(r).minCoeff(&down);
  return layout.label(static_cast<int>(up)) + " - " + layout.label(static_cast<int>(down));
}

Matrix numeric_information(const ModelSpec& spec, const Vector& theta, const Dataset& data) {
  const auto f = [&](const Vector& t) { return loglik_alt_reference(spec, t, data); };
  const Eigen::Index p = theta.size();
  Vector step(p);
  for (Eigen::Index i = 0; i < p; ++i) step[i] = 1e-4 * (1.0 + std::abs(theta[i]));
  Matrix h(p, p);
  Vector t = theta;
  const double f0 = f(theta);
  for (Eigen::Index i = 0; i < p; ++i) {
    t[i] = theta[i] + step[i];
    const double up = f(t);
    t[i] = theta[i] - step[i];
    const double down = f(t);
    t[i] = theta[i];
    h(i, i) = (up - 2.0 * f0 + down) / (step[i] * step[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          t[i] = theta[i] + si * step[i];
          t[j] = theta[j] + sj * step[j];
          acc += si * sj * f(t);
        }
      }
      t[i] = theta[i];
      t[j] = theta[j];
      h(i, j) = h(j, i) = acc / (4.0 * step[i] * step[j]);
    }
  }
  return -h;
}

struct Attempt {
  OptimizerResult result;
  Vector theta;
};

Attempt run_optimizer(const ModelSpec& spec, const Dataset& data, const ParamLayout& layout, const Vector& start,
                      const FitOptions& options) {
  ConstrainedProblem problem;
  problem.objective = [&](const Vector& t, Vector* g) { return scaled_negative_loglik(spec, data, t, g); };
  problem.A = layout.constraint_matrix();
  problem.b = Vector::Constant(problem.A.rows(), options.slack);
  OptimizerOptions opt;
  opt.max_outer = options.max_outer_iterations;
  opt.max_inner = options.max_inner_iterations;
  opt.grad_tol = options.gradient_tolerance;
  opt.violation_tol = options.constraint_tolerance;
  opt.penalty_growth = options.penalty_growth;
  Attempt a{minimize_augmented_lagrangian(problem, start, opt), {}};
  a.theta = a.result.x;
  repair_monotone(problem.A, options.slack, a.theta);
  return a;
}

}  // namespace

void FitOptions::validate() const {
  if (max_outer_iterations < 1 || max_inner_iterations < 1) throw ConfigError("iteration limits must be positive");
  if (!(gradient_tolerance > 0.0) || !(constraint_tolerance > 0.0) || !(slack > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  if (!(penalty_growth > 1.0)) throw ConfigError("penalty growth factor must exceed 1");
  if (restarts < 0) throw ConfigError("restarts must be non-negative");
}

Vector FittedModel::standard_errors() const {
  if (vcov.size() == 0) throw NumericalError("no covariance matrix available for this fit");
  return vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

FittedModel model_at(const ModelSpec& spec, Vector theta) {
  const ParamLayout layout(spec);
  if (theta.size() != layout.size()) throw ConfigError("parameter vector length does not match the model layout");
  FittedModel m{spec, std::move(theta), Matrix(), 0.0, 0.0, 0, {}};
  m.diagnostics.converged = true;
  m.diagnostics.message = "parameters supplied";
  return m;
}

Vector heuristic_values(const ModelSpec& spec, const Dataset& data) {
  const ParamLayout layout(spec);
  Vector theta = Vector::Zero(layout.size());
  for (int j = 0; j < spec.dim(); ++j) {
    const ConditionalBasis& cb = spec.margin(j);
    const BernsteinBasis& a = cb.response_basis();
    std::vector<double> y(static_cast<std::size_t>(data.n()));
    for (int i = 0; i < data.n(); ++i) y[static_cast<std::size_t>(i)] = data.Y(i, j);
    std::sort(y.begin(), y.end());
    Vector block(a.size());
    for (int m = 0; m <= a.order(); ++m) {
      const double t = a.support().lo() + a.support().width() * m / std::max(1, a.order());
      block[m] = spec.reference().quantile(empirical_cdf(y, t));
      if (m > 0) block[m] = std::max(block[m], block[m - 1] + 0.01);
    }
    const int off = layout.margin_offset(j);
    theta.segment(off, a.size()) = block;
    if (cb.kind() == ConditionalBasis::Kind::ResponseVarying &&
        cb.covariate_basis().kind() == CovariateBasis::Kind::Bernstein) {
      // Bernstein covariate bases sum to one, so equal blocks give h = a' block for every x.
      for (int l = 1; l < cb.covariate_basis().size(); ++l) theta.segment(off + l * a.size(), a.size()) = block;
    }
  }
  return theta;
}

Vector initial_values(const ModelSpec& spec, const Dataset& data) {
  const ParamLayout layout(spec);
  const Vector heuristic = heuristic_values(spec, data);
  Vector theta = heuristic;
  theta.tail(layout.size() - layout.lambda_block_offset()).setZero();
  if (spec.dim() == 1) {
    FitOptions opt;
    opt.compute_vcov = false;
    opt.start = heuristic;
    const FittedModel m = fit(spec, data, opt);
    return std::isfinite(m.loglik) ? m.theta : heuristic;
  }
  for (int j = 0; j < spec.dim(); ++j) {
    const ModelSpec sub(spec.reference(), {spec.margin(j)}, {});
    const Dataset sub_data(data.Y.col(j), data.X);
    const int off = layout.margin_offset(j);
    const int sz = layout.margin_size(j);
    FitOptions opt;
    opt.compute_vcov = false;
    opt.start = heuristic.segment(off, sz);
    try {
      const FittedModel m = fit(sub, sub_data, opt);
      if (std::isfinite(m.loglik)) theta.segment(off, sz) = m.theta;
    } catch (const std::runtime_error&) {
      // keep the heuristic block
    }
  }
  return theta;
}

FittedModel fit(const ModelSpec& spec, const Dataset& data, const FitOptions& options) {
  options.validate();
  if (data.dim() != spec.dim()) throw ConfigError("dataset and model have different response dimensions");
  if (data.covariates() < spec.required_covariates()) throw ConfigError("dataset has too few covariate columns");
  const Dataset d = data.canonical();
  const ParamLayout layout(spec);

  FittedModel out{spec, Vector(), Matrix(), -kInf, log_normalizing_constant(d.n(), d.dim()), d.n(), {}};
  if (d.n() <= layout.size()) {
    out.diagnostics.warnings.push_back("fewer observations (" + std::to_string(d.n()) + ") than parameters (" +
                                       std::to_string(layout.size()) + ")");
  }

  Vector start = options.start ? *options.start : initial_values(spec, d);
  if (start.size() != layout.size()) throw ConfigError("starting vector length does not match the model layout");
  if (!std::isfinite(scaled_negative_loglik(spec, d, start, nullptr))) {
    out.diagnostics.warnings.push_back("starting values infeasible; using the quantile heuristic");
    start = heuristic_values(spec, d);
  }
  if (!std::isfinite(scaled_negative_loglik(spec, d, start, nullptr))) {
    out.theta = start;
    out.diagnostics.message = "no feasible starting value: transformation derivative is not positive at some rows";
    return out;
  }

  Attempt best = run_optimizer(spec, d, layout, start, options);
  if (options.restarts > 0) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> jitter(0.0, 0.1);
    const Matrix& a = layout.constraint_matrix();
    for (int r = 0; r < options.restarts; ++r) {
      Vector s = start;
      for (Eigen::Index i = 0; i < s.size(); ++i) s[i] += jitter(rng);
      repair_monotone(a, 0.01, s);
      if (!std::isfinite(scaled_negative_loglik(spec, d, s, nullptr))) continue;
      Attempt cand = run_optimizer(spec, d, layout, s, options);
      const bool better = (cand.result.converged && !best.result.converged) ||
                          (cand.result.converged == best.result.converged && cand.result.value < best.result.value);
      if (better) best = std::move(cand);
    }
  }

  out.theta = best.theta;
  const OptimizerResult& res = best.result;
  FitDiagnostics& diag = out.diagnostics;
  diag.outer_iterations = res.outer_iterations;
  diag.inner_iterations = res.inner_iterations;
  diag.lagrangian_gradient = res.lagrangian_gradient;
  diag.max_violation = res.max_violation;
  for (const auto& [s, e] : res.outer_progress) diag.outer_progress.emplace_back(-s, -e);
  const double value = scaled_negative_loglik(spec, d, out.theta, nullptr);
  out.loglik = std::isfinite(value) ? -value * d.n() : -kInf;
  if (!spec.reference().is_normal()) out.log_constant = 0.0;  // loglik_alt_reference includes constants

  const Matrix& a = layout.constraint_matrix();
  diag.min_slack = a.rows() > 0 ? (a * out.theta).minCoeff() : kInf;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    if (a.row(r).dot(out.theta) <= 1e-6 || (res.multipliers.size() > r && res.multipliers[r] > 0.0)) {
      diag.active_constraints.push_back(describe_constraint(layout, a, r));
    }
  }
  diag.converged = res.converged && std::isfinite(out.loglik) && diag.min_slack > 0.0;
  diag.message = res.message;
  if (!std::isfinite(out.loglik)) diag.message = "estimate is infeasible after projection";

  if (options.compute_vcov && diag.converged) {
    try {
      out.vcov = asymptotic_covariance(out, d);
    } catch (const NumericalError& e) {
      diag.warnings.push_back(e.what());
    }
  }
  return out;
}

Matrix observed_information(const ModelSpec& spec, const Vector& theta, const Dataset& data) {
  if (spec.reference().is_normal()) return fisher(spec, theta, data);
  return numeric_information(spec, theta, data);
}

Matrix asymptotic_covariance(const FittedModel& fitted, const Dataset& data) {
  const Matrix info = observed_information(fitted.spec, fitted.theta, data);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(info);
  if (eig.info() != Eigen::Success) throw NumericalError("eigen decomposition of the Fisher information failed");
  const Vector& ev = eig.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  const double smallest = ev[0];
  if (!(smallest > 0.0) || largest / smallest > 1e12) {
    const ParamLayout layout(fitted.spec);
    std::ostringstream msg;
    msg << "Fisher information is singular or ill-conditioned (condition number "
        << (smallest > 0.0 ? largest / smallest : kInf) << "); weakly identified directions:";
    for (Eigen::Index k = 0; k < ev.size() && k < 3; ++k) {
      if (ev[k] > 1e-12 * largest) break;
      const Vector v = eig.eigenvectors().col(k);
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
      for (Eigen::Index i = 0; i < v.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
      std::sort(idx.begin(), idx.end(), [&](auto l, auto r) { return std::abs(v[l]) > std::abs(v[r]); });
      msg << " [eigenvalue " << ev[k] << ":";
      for (std::size_t i = 0; i < idx.size() && i < 3; ++i) {
        msg << ' ' << layout.label(static_cast<int>(idx[i])) << '(' << v[idx[i]] << ')';
      }
      msg << ']';
    }
    throw NumericalError(msg.str());
  }
  Matrix vcov = eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (vcov + vcov.transpose());
}

}  // namespace mctm
