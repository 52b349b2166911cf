#include "mctm/normal.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace mctm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}  // namespace

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) * std::numbers::inv_sqrtpi / std::numbers::sqrt2; }

double std_normal_log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double std_normal_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

namespace {

// Upper orthant probability P(X > dh, Y > dk); Genz's bvnu.
double bvn_upper(double dh, double dk, double r) {
  if (dh == kInf || dk == kInf) return 0.0;
  if (dh == -kInf) return dk == -kInf ? 1.0 : std_normal_cdf(-dk);
  if (dk == -kInf) return std_normal_cdf(-dh);
  if (r == 0.0) return std_normal_cdf(-dh) * std_normal_cdf(-dk);

  static constexpr std::array<double, 3> w6 = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
  static constexpr std::array<double, 3> x6 = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
  static constexpr std::array<double, 6> w12 = {.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                                0.2031674267230659, 0.2334925365383547, 0.2491470458134029};
  static constexpr std::array<double, 6> x12 = {0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                                                0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
  static constexpr std::array<double, 10> w20 = {.01761400713915212, .04060142980038694, .06267204833410906,
                                                 .08327674157670475, 0.1019301198172404, 0.1181945319615184,
                                                 0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
                                                 0.1527533871307259};
  static constexpr std::array<double, 10> x20 = {0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                                                 0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                                                 0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                                                 0.07652652113349733};

  const double* w = nullptr;
  const double* xg = nullptr;
  int ng = 0;
  if (std::abs(r) < 0.3) {
    w = w6.data(); xg = x6.data(); ng = 3;
  } else if (std::abs(r) < 0.75) {
    w = w12.data(); xg = x12.data(); ng = 6;
  } else {
    w = w20.data(); xg = x20.data(); ng = 10;
  }
  // Nodes 1 - x and 1 + x on (0, 2), each with weight w.
  std::vector<double> nodes;
  std::vector<double> weights;
  for (int i = 0; i < ng; ++i) {
    nodes.push_back(1.0 - xg[i]);
    weights.push_back(w[i]);
  }
  for (int i = 0; i < ng; ++i) {
    nodes.push_back(1.0 + xg[i]);
    weights.push_back(w[i]);
  }

  const double tp = 2.0 * std::numbers::pi;
  double h = dh;
  double k = dk;
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r) / 2.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double sn = std::sin(asr * nodes[i]);
      bvn += weights[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    bvn = bvn * asr / tp + std_normal_cdf(-h) * std_normal_cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (std::abs(r) < 1.0) {
      const double as = 1.0 - r * r;
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      double asr = -(bs / as + hk) / 2.0;
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;
      if (asr > -100.0) {
        bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      }
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(tp) * std_normal_cdf(-b / a);
        bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a /= 2.0;
      double sum = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double xs = (a * nodes[i]) * (a * nodes[i]);
        const double asr_i = -(bs / xs + hk) / 2.0;
        if (asr_i <= -100.0) continue;
        const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
        const double rs = std::sqrt(1.0 - xs);
        const double ep = std::exp(-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
        sum += std::exp(asr_i) * (sp - ep) * weights[i];
      }
      bvn = (a * sum - bvn) / tp;
    }
    if (r > 0.0) {
      bvn += std_normal_cdf(-std::max(h, k));
    } else if (h >= k) {
      bvn = -bvn;
    } else {
      const double l = h < 0.0 ? std_normal_cdf(k) - std_normal_cdf(h) : std_normal_cdf(-h) - std_normal_cdf(-k);
      bvn = l - bvn;
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

constexpr std::array<int, 40> kPrimes = {2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,
                                         47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107,
                                         109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173};

}  // namespace

double bivariate_normal_cdf(double h, double k, double r) {
  if (std::isnan(h) || std::isnan(k) || std::isnan(r)) return std::numeric_limits<double>::quiet_NaN();
  r = std::clamp(r, -1.0, 1.0);
  return bvn_upper(-h, -k, r);
}

MvnProbability mvn_cdf(const Vector& upper, const Matrix& cov, int points, std::uint64_t seed) {
  const auto m_all = upper.size();
  if (cov.rows() != m_all || cov.cols() != m_all) throw ConfigError("mvn_cdf: dimension mismatch");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < m_all; ++i) {
    if (std::isnan(upper[i])) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    if (upper[i] == -kInf) return {0.0, 0.0};
    if (upper[i] != kInf) keep.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  if (m == 0) return {1.0, 0.0};
  Vector b(m);
  Matrix s(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    b[i] = upper[keep[i]];
    for (Eigen::Index j = 0; j < m; ++j) s(i, j) = cov(keep[i], keep[j]);
  }
  if (m == 1) return {std_normal_cdf(b[0] / std::sqrt(s(0, 0))), 0.0};
  if (m == 2) {
    const double s0 = std::sqrt(s(0, 0));
    const double s1 = std::sqrt(s(1, 1));
    return {bivariate_normal_cdf(b[0] / s0, b[1] / s1, s(0, 1) / (s0 * s1)), 0.0};
  }

  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) throw NumericalError("mvn_cdf: covariance is not positive definite");
  const Matrix l = llt.matrixL();

  constexpr int kShifts = 10;
  const int per_shift = std::max(1, points / kShifts);
  if (m - 1 > static_cast<Eigen::Index>(kPrimes.size())) throw ConfigError("mvn_cdf: dimension too large");
  std::vector<double> q(static_cast<std::size_t>(m - 1));
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::sqrt(static_cast<double>(kPrimes[i]));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> shift_means;
  std::vector<double> shift(q.size());
  Vector y(m);
  for (int sidx = 0; sidx < kShifts; ++sidx) {
    for (double& v : shift) v = unif(rng);
    double acc = 0.0;
    for (int kpt = 1; kpt <= per_shift; ++kpt) {
      double f = std_normal_cdf(b[0] / l(0, 0));
      double e_prev = f;
      for (Eigen::Index i = 1; i < m && f > 0.0; ++i) {
        double frac = kpt * q[static_cast<std::size_t>(i - 1)] + shift[static_cast<std::size_t>(i - 1)];
        frac -= std::floor(frac);
        const double wv = std::abs(2.0 * frac - 1.0);  // baker's transform
        const double arg = std::clamp(wv * e_prev, 1e-300, 1.0 - 1e-16);
        y[i - 1] = std_normal_quantile(arg);
        double t = b[i];
        for (Eigen::Index j = 0; j < i; ++j) t -= l(i, j) * y[j];
        e_prev = std_normal_cdf(t / l(i, i));
        f *= e_prev;
      }
      acc += f;
    }
    shift_means.push_back(acc / per_shift);
  }
  double mean = 0.0;
  for (double v : shift_means) mean += v;
  mean /= kShifts;
  double var = 0.0;
  for (double v : shift_means) var += (v - mean) * (v - mean);
  var /= (kShifts - 1) * kShifts;
  return {std::clamp(mean, 0.0, 1.0), 3.0 * std::sqrt(var)};
}

double mvn_log_density(const Vector& z, const Vector& mean, const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("mvn_log_density: covariance is not positive definite");
  const Vector r = llt.matrixL().solve(z - mean);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * r.squaredNorm() - 0.5 * logdet - static_cast<double>(z.size()) * kLogSqrt2Pi;
}

QuadratureRule gauss_hermite_normal(int n) {
  if (n < 1) throw ConfigError("quadrature needs at least one node");
  Matrix jac = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    jac(i, i - 1) = std::sqrt(static_cast<double>(i));
    jac(i - 1, i) = jac(i, i - 1);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jac);
  QuadratureRule rule{eig.eigenvalues(), Vector(n)};
  for (int i = 0; i < n; ++i) rule.weights[i] = eig.eigenvectors()(0, i) * eig.eigenvectors()(0, i);
  rule.weights /= rule.weights.sum();
  return rule;
}

}  // namespace mctm
