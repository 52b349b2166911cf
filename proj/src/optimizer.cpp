#include "mctm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mctm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const ConstrainedProblem& p, const Vector& mu, double rho) : p_(p), mu_(mu), rho_(rho) {}

  double operator()(const Vector& x, Vector* grad) const {
    const double f = p_.objective(x, grad);
    if (!std::isfinite(f)) return kInf;
    if (p_.A.rows() == 0) return f;
    const Vector g = p_.A * x - p_.b;
    double pen = 0.0;
    Vector w(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (g[i] <= mu_[i] / rho_) {
        pen += -mu_[i] * g[i] + 0.5 * rho_ * g[i] * g[i];
        w[i] = mu_[i] - rho_ * g[i];
      } else {
        pen += -mu_[i] * mu_[i] / (2.0 * rho_);
        w[i] = 0.0;
      }
    }
    if (grad) *grad -= p_.A.transpose() * w;
    return f + pen;
  }

 private:
  const ConstrainedProblem& p_;
  const Vector& mu_;
  double rho_;
};

struct LineSearchResult {
  bool ok = false;
  Vector x;
  Vector grad;
  double value = kInf;
};

// Weak Wolfe conditions by bracketing and bisection.
LineSearchResult wolfe_search(const AugmentedLagrangian& fn, const Vector& x, double f0, const Vector& g0,
                              const Vector& d) {
  constexpr double c1 = 1e-4;
  constexpr double c2 = 0.9;
  const double slope = g0.dot(d);
  double lo = 0.0;
  double hi = kInf;
  double t = 1.0;
  LineSearchResult best;
  for (int it = 0; it < 60; ++it) {
    Vector xt = x + t * d;
    Vector gt(x.size());
    const double ft = fn(xt, &gt);
    if (!std::isfinite(ft) || ft > f0 + c1 * t * slope) {
      hi = t;
    } else {
      // Armijo holds: keep as a fallback even if the curvature condition fails.
      if (ft < best.value) best = {true, xt, gt, ft};
      if (gt.dot(d) < c2 * slope) {
        lo = t;
      } else {
        return {true, std::move(xt), std::move(gt), ft};
      }
    }
    t = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * lo;
    if (std::isfinite(hi) && hi - lo < 1e-16 * (1.0 + lo)) break;
  }
  return best;
}

struct InnerResult {
  Vector x;
  double value = kInf;
  Vector grad;
  int iterations = 0;
};

InnerResult bfgs(const AugmentedLagrangian& fn, Vector x, const OptimizerOptions& options) {
  const Eigen::Index p = x.size();
  Vector g(p);
  double f = fn(x, &g);
  Matrix h = Matrix::Identity(p, p);
  bool scaled = false;
  int stall = 0;
  int it = 0;
  for (; it < options.max_inner; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= options.grad_tol) break;
    Vector d = -h * g;
    if (g.dot(d) >= 0.0) {
      h.setIdentity();
      scaled = false;
      d = -g;
    }
    LineSearchResult ls = wolfe_search(fn, x, f, g, d);
    if (!ls.ok && scaled) {
      h.setIdentity();
      scaled = false;
      d = -g;
      ls = wolfe_search(fn, x, f, g, d);
    }
    if (!ls.ok) break;
    const Vector s = ls.x - x;
    const Vector y = ls.grad - g;
    const double ys = y.dot(s);
    const double decrease = f - ls.value;
    x = std::move(ls.x);
    g = std::move(ls.grad);
    f = ls.value;
    if (ys > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h = Matrix::Identity(p, p) * (ys / y.squaredNorm());
        scaled = true;
      }
      const double r = 1.0 / ys;
      const Vector hy = h * y;
      const double yhy = y.dot(hy);
      h += ((ys + yhy) * r * r) * (s * s.transpose()) - r * (hy * s.transpose() + s * hy.transpose());
    }
    stall = decrease <= 1e-16 * (1.0 + std::abs(f)) ? stall + 1 : 0;
    if (stall >= 5) break;
  }
  return {std::move(x), f, std::move(g), it};
}

}  // namespace

OptimizerResult minimize_augmented_lagrangian(const ConstrainedProblem& problem, const Vector& x0,
                                              const OptimizerOptions& options) {
  if (problem.A.rows() != problem.b.size() || (problem.A.rows() > 0 && problem.A.cols() != x0.size())) {
    throw ConfigError("constraint matrix dimensions do not match");
  }
  OptimizerResult out;
  out.x = x0;
  if (!std::isfinite(problem.objective(x0, nullptr))) {
    out.value = kInf;
    out.message = "objective is not finite at the starting point";
    return out;
  }
  const Eigen::Index m = problem.A.rows();
  Vector mu = Vector::Zero(m);
  double rho = options.initial_penalty;
  double prev_violation = kInf;
  Vector x = x0;
  for (int outer = 0; outer < options.max_outer; ++outer) {
    const AugmentedLagrangian fn(problem, mu, rho);
    const double start = fn(x, nullptr);
    InnerResult inner = bfgs(fn, x, options);
    x = inner.x;
    out.outer_progress.emplace_back(start, inner.value);
    out.inner_iterations += inner.iterations;
    out.outer_iterations = outer + 1;

    double violation = 0.0;
    double complementarity = 0.0;
    if (m > 0) {
      const Vector g = problem.A * x - problem.b;
      for (Eigen::Index i = 0; i < m; ++i) {
        violation = std::max(violation, -g[i]);
        mu[i] = std::max(0.0, mu[i] - rho * g[i]);
        complementarity = std::max(complementarity, std::min(mu[i], std::max(g[i], 0.0)));
      }
    }
    // With the updated multipliers the inner gradient is the Lagrangian gradient.
    out.lagrangian_gradient = inner.grad.lpNorm<Eigen::Infinity>();
    out.max_violation = violation;
    if (violation <= options.violation_tol && complementarity <= std::sqrt(options.violation_tol) &&
        out.lagrangian_gradient <= options.grad_tol) {
      out.converged = true;
      break;
    }
    if (violation > 0.25 * prev_violation) rho = std::min(rho * options.penalty_growth, options.max_penalty);
    prev_violation = violation;
  }
  out.x = x;
  out.value = problem.objective(x, nullptr);
  out.multipliers = mu;
  out.message = out.converged ? "converged" : "outer iteration limit reached before the KKT tolerances were met";
  return out;
}

}  // namespace mctm
