#include "fixtures.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <numbers>

namespace mctm::testing {

ConditionalBasis identity_margin(double lo, double hi) {
  return ConditionalBasis::unconditional(BernsteinBasis(1, Support(lo, hi)));
}

Vector identity_theta(int dim, double lo, double hi) {
  Vector t(2 * dim);
  for (int j = 0; j < dim; ++j) {
    t[2 * j] = lo;
    t[2 * j + 1] = hi;
  }
  return t;
}

FittedModel gaussian_model(const Matrix& L, double lo, double hi) {
  const int dim = static_cast<int>(L.rows());
  std::vector<ConditionalBasis> margins(static_cast<std::size_t>(dim), identity_margin(lo, hi));
  const ModelSpec spec = ModelSpec::with_common_lambda(ReferenceDistribution(), margins, CovariateBasis::intercept());
  Vector theta(2 * dim + dim * (dim - 1) / 2);
  theta.head(2 * dim) = identity_theta(dim, lo, hi);
  int p = 2 * dim;
  for (int j = 1; j < dim; ++j) {
    for (int k = 0; k < j; ++k) theta[p++] = L(j, k);
  }
  return model_at(spec, theta);
}

Vector bernstein_interpolate(const std::function<double(double)>& f, int order, double lo, double hi) {
  Matrix A(order + 1, order + 1);
  Vector rhs(order + 1);
  for (int i = 0; i <= order; ++i) {
    const double y = lo + (hi - lo) * i / order;
    for (int m = 0; m <= order; ++m) A(i, m) = rational_bernstein(order, m, y, lo, hi);
    rhs[i] = f(y);
  }
  return A.fullPivLu().solve(rhs);
}

double rational_bernstein(int M, int m, double y, double lo, double hi) {
  using boost::multiprecision::cpp_rational;
  const cpp_rational u = (cpp_rational(y) - cpp_rational(lo)) / (cpp_rational(hi) - cpp_rational(lo));
  cpp_rational binom = 1;
  for (int i = 1; i <= m; ++i) binom = binom * (M - m + i) / i;
  cpp_rational v = binom;
  for (int i = 0; i < m; ++i) v *= u;
  for (int i = 0; i < M - m; ++i) v *= (1 - u);
  return static_cast<double>(v);
}

double bvn_log_density(double y1, double y2, const Matrix& s) {
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  const double q = (s(1, 1) * y1 * y1 - 2.0 * s(0, 1) * y1 * y2 + s(0, 0) * y2 * y2) / det;
  return -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det) - 0.5 * q;
}

double bvn_cdf_quadrature(double h, double k, double r) {
  const double sr = std::sqrt(1.0 - r * r);
  const auto f = [&](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi) * 0.5 * std::erfc(-(k - r * x) / sr / std::numbers::sqrt2);
  };
  const double lower = std::min(h, -40.0);
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lower, h, 15, 1e-14);
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

double simpson2(const std::function<double(double, double)>& f, double a1, double b1, double a2, double b2, int n) {
  return simpson([&](double u) { return simpson([&](double v) { return f(u, v); }, a2, b2, n); }, a1, b1, n);
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double rel_step) {
  Vector g(x.size());
  Vector t = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * (1.0 + std::abs(x[i]));
    t[i] = x[i] + h;
    const double up = f(t);
    t[i] = x[i] - h;
    const double down = f(t);
    t[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

Matrix fd_hessian(const std::function<double(const Vector&)>& f, const Vector& x, double rel_step) {
  const Eigen::Index p = x.size();
  Matrix H(p, p);
  Vector t = x;
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double hi = rel_step * (1.0 + std::abs(x[i]));
    t[i] = x[i] + hi;
    const double fp = f(t);
    t[i] = x[i] - hi;
    const double fm = f(t);
    t[i] = x[i];
    H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double hj = rel_step * (1.0 + std::abs(x[j]));
      double s = 0.0;
      for (int a : {1, -1}) {
        for (int b : {1, -1}) {
          t[i] = x[i] + a * hi;
          t[j] = x[j] + b * hj;
          s += a * b * f(t);
        }
      }
      t[i] = x[i];
      t[j] = x[j];
      H(i, j) = H(j, i) = s / (4.0 * hi * hj);
    }
  }
  return H;
}

double max_rel_error(const Matrix& a, const Matrix& b, double floor) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::max(std::abs(b(i, j)), floor));
    }
  }
  return worst;
}

namespace {

Vector increasing(std::mt19937_64& rng, int size, double lo_step, double hi_step) {
  std::uniform_real_distribution<double> start(-2.0, 0.0);
  std::uniform_real_distribution<double> step(lo_step, hi_step);
  Vector v(size);
  v[0] = start(rng);
  for (int i = 1; i < size; ++i) v[i] = v[i - 1] + step(rng);
  return v;
}

}  // namespace

Instance random_instance(std::mt19937_64& rng, int n, int index) {
  std::uniform_int_distribution<int> pick_dim(1, 3);
  std::uniform_int_distribution<int> pick_order(2, 5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> small(-0.15, 0.15);
  const int dim = index < 3 ? index + 1 : pick_dim(rng);
  constexpr int kCovariates = 2;
  const Support xs(-1.0, 1.0);

  RowMatrix Y(n, dim);
  RowMatrix X(n, kCovariates);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) Y(i, j) = 2.0 * unit(rng);
    for (int c = 0; c < kCovariates; ++c) X(i, c) = unit(rng);
  }
  const Support ys(-2.0, 2.0);

  std::vector<ConditionalBasis> margins;
  std::vector<Vector> blocks;
  for (int j = 0; j < dim; ++j) {
    const BernsteinBasis a(pick_order(rng), ys);
    const int kind = (index + j) % 4;
    if (kind == 0) {
      margins.push_back(ConditionalBasis::unconditional(a));
      blocks.push_back(increasing(rng, a.size(), 0.3, 1.5));
    } else if (kind == 1) {
      margins.push_back(ConditionalBasis::additive_shift(a, {0, 1}));
      Vector b(a.size() + 2);
      b << increasing(rng, a.size(), 0.3, 1.5), unit(rng), unit(rng);
      blocks.push_back(b);
    } else if (kind == 2) {
      margins.push_back(ConditionalBasis::response_varying(a, CovariateBasis::linear({0, 1})));
      Vector b(3 * a.size());
      b.head(a.size()) = increasing(rng, a.size(), 0.5, 1.5);
      // Coefficient m moves by s_c * m * x_c, |s_c| <= 0.15: increments stay above 0.5 - 0.3.
      for (int c = 1; c <= 2; ++c) {
        const double s = small(rng);
        for (int m = 0; m < a.size(); ++m) b[c * a.size() + m] = s * m;
      }
      blocks.push_back(b);
    } else {
      const CovariateBasis cb = CovariateBasis::bernstein(1, 2, xs);
      margins.push_back(ConditionalBasis::response_varying(a, cb));
      Vector b(cb.size() * a.size());
      for (int l = 0; l < cb.size(); ++l) b.segment(l * a.size(), a.size()) = increasing(rng, a.size(), 0.3, 1.5);
      blocks.push_back(b);
    }
  }

  std::vector<LambdaTerm> terms;
  std::vector<Vector> gammas;
  for (int j = 1; j < dim; ++j) {
    for (int k = 0; k < j; ++k) {
      LambdaTerm t;
      t.row = j;
      t.col = k;
      switch ((index + j + k) % 3) {
        case 0: t.basis = CovariateBasis::intercept(); break;
        case 1: t.basis = CovariateBasis::linear({0, 1}); break;
        default: t.basis = CovariateBasis::bernstein(0, 3, xs); break;
      }
      Vector g(t.basis.size());
      for (auto& v : g) v = unit(rng);
      terms.push_back(t);
      gammas.push_back(g);
    }
  }
  ModelSpec spec(ReferenceDistribution(), margins, terms);
  const ParamLayout layout(spec);
  StructuredParams sp{blocks, gammas};
  return {spec, pack(layout, sp), Dataset(Y, X)};
}

double pearson(const Vector& a, const Vector& b) {
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

}  // namespace mctm::testing
