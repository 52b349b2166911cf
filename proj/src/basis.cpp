#include "mctm/basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mctm {

namespace {

std::vector<double> binomial_row(int n) {
  std::vector<double> row(static_cast<std::size_t>(std::max(n, 0)) + 1, 1.0);
  for (int k = 1; k < n; ++k) {
    row[k] = row[k - 1] * static_cast<double>(n - k + 1) / static_cast<double>(k);
  }
  return row;
}

// b_{m,n}(u) for m = 0..n written into out[0..n].
void bernstein_values(int n, double u, const std::vector<double>& binom, double* out) {
  const double v = 1.0 - u;
  // out[m] = u^m first, then multiply by v^(n-m) from the right.
  double p = 1.0;
  for (int m = 0; m <= n; ++m) {
    out[m] = binom[m] * p;
    p *= u;
  }
  double q = 1.0;
  for (int m = n; m >= 0; --m) {
    out[m] *= q;
    q *= v;
  }
}

}  // namespace

Support::Support(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    std::ostringstream msg;
    msg << "invalid support [" << lo << ", " << hi << "]: need finite lo < hi";
    throw ConfigError(msg.str());
  }
}

Support Support::from_range(ConstSpan values, double margin) {
  if (values.empty()) throw ConfigError("cannot derive a support from an empty column");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  double lo = *mn;
  double hi = *mx;
  if (!(lo < hi)) throw ConfigError("cannot derive a support from a constant column");
  const double pad = margin * (hi - lo);
  return {lo - pad, hi + pad};
}

BernsteinBasis::BernsteinBasis(int order, Support support)
    : order_(order), support_(support), binom_(binomial_row(order)), binom_lower_(binomial_row(order - 1)) {
  if (order < 1) throw ConfigError("Bernstein order must be >= 1");
}

void BernsteinBasis::eval_into(double y, std::span<double> out) const {
  double u = (y - support_.lo()) / support_.width();
  u = std::clamp(u, 0.0, 1.0);
  bernstein_values(order_, u, binom_, out.data());
}

void BernsteinBasis::deriv_into(double y, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (!support_.contains(y)) return;
  const double u = (y - support_.lo()) / support_.width();
  // d/du b_{m,M} = M (b_{m-1,M-1} - b_{m,M-1})
  double lower[64];
  std::vector<double> heap;
  double* low = lower;
  if (order_ > 63) {
    heap.resize(static_cast<std::size_t>(order_));
    low = heap.data();
  }
  bernstein_values(order_ - 1, u, binom_lower_, low);
  const double scale = static_cast<double>(order_) / support_.width();
  for (int m = 0; m <= order_; ++m) {
    const double left = m > 0 ? low[m - 1] : 0.0;
    const double right = m < order_ ? low[m] : 0.0;
    out[m] = scale * (left - right);
  }
}

Vector BernsteinBasis::eval(double y) const {
  Vector out(size());
  eval_into(y, {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

Vector BernsteinBasis::deriv(double y) const {
  Vector out(size());
  deriv_into(y, {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

Vector bernstein_eval(double y, const BernsteinBasis& basis) { return basis.eval(y); }
Vector bernstein_deriv(double y, const BernsteinBasis& basis) { return basis.deriv(y); }

Matrix monotonicity_constraints(int order) {
  if (order < 1) throw ConfigError("monotonicity constraints need order >= 1");
  Matrix d = Matrix::Zero(order, order + 1);
  for (int m = 0; m < order; ++m) {
    d(m, m) = -1.0;
    d(m, m + 1) = 1.0;
  }
  return d;
}

// ---------------------------------------------------------------------------

CovariateBasis CovariateBasis::intercept() { return {Kind::Intercept, {}, {}}; }

CovariateBasis CovariateBasis::linear(std::vector<int> columns) {
  for (int c : columns) {
    if (c < 0) throw ConfigError("negative covariate column index");
  }
  return {Kind::Linear, std::move(columns), {}};
}

CovariateBasis CovariateBasis::bernstein(int column, int order, Support support) {
  if (column < 0) throw ConfigError("negative covariate column index");
  return {Kind::Bernstein, {column}, {BernsteinBasis(order, support)}};
}

int CovariateBasis::size() const {
  switch (kind_) {
    case Kind::Intercept: return 1;
    case Kind::Linear: return 1 + static_cast<int>(columns_.size());
    case Kind::Bernstein: return bernstein_.front().size();
  }
  return 0;
}

const BernsteinBasis& CovariateBasis::bernstein_basis() const {
  if (kind_ != Kind::Bernstein) throw ConfigError("covariate basis is not a Bernstein basis");
  return bernstein_.front();
}

int CovariateBasis::required_covariates() const {
  int need = 0;
  for (int c : columns_) need = std::max(need, c + 1);
  return need;
}

void CovariateBasis::eval_into(ConstSpan x, std::span<double> out) const {
  if (static_cast<int>(x.size()) < required_covariates()) {
    throw ConfigError("covariate vector too short for covariate basis");
  }
  switch (kind_) {
    case Kind::Intercept:
      out[0] = 1.0;
      break;
    case Kind::Linear:
      out[0] = 1.0;
      for (std::size_t i = 0; i < columns_.size(); ++i) out[i + 1] = x[columns_[i]];
      break;
    case Kind::Bernstein:
      bernstein_.front().eval_into(x[columns_.front()], out);
      break;
  }
}

Vector CovariateBasis::eval(ConstSpan x) const {
  Vector out(size());
  eval_into(x, {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

// ---------------------------------------------------------------------------

ConditionalBasis ConditionalBasis::unconditional(BernsteinBasis response) {
  return {Kind::Unconditional, std::move(response), CovariateBasis::intercept(), {}};
}

ConditionalBasis ConditionalBasis::additive_shift(BernsteinBasis response, std::vector<int> columns) {
  for (int c : columns) {
    if (c < 0) throw ConfigError("negative covariate column index");
  }
  return {Kind::AdditiveShift, std::move(response), CovariateBasis::intercept(), std::move(columns)};
}

ConditionalBasis ConditionalBasis::response_varying(BernsteinBasis response, CovariateBasis covariates) {
  return {Kind::ResponseVarying, std::move(response), std::move(covariates), {}};
}

int ConditionalBasis::size() const {
  switch (kind_) {
    case Kind::Unconditional: return response_.size();
    case Kind::AdditiveShift: return response_.size() + static_cast<int>(shift_columns_.size());
    case Kind::ResponseVarying: return response_.size() * covariates_.size();
  }
  return 0;
}

int ConditionalBasis::required_covariates() const {
  int need = covariates_.required_covariates();
  for (int c : shift_columns_) need = std::max(need, c + 1);
  return need;
}

void ConditionalBasis::eval_into(double y, ConstSpan x, std::span<double> c, std::span<double> dc) const {
  if (static_cast<int>(x.size()) < required_covariates()) {
    throw ConfigError("covariate vector too short for conditional basis");
  }
  const auto na = static_cast<std::size_t>(response_.size());
  switch (kind_) {
    case Kind::Unconditional:
      response_.eval_into(y, c.first(na));
      response_.deriv_into(y, dc.first(na));
      break;
    case Kind::AdditiveShift:
      response_.eval_into(y, c.first(na));
      response_.deriv_into(y, dc.first(na));
      for (std::size_t i = 0; i < shift_columns_.size(); ++i) {
        c[na + i] = -x[shift_columns_[i]];
        dc[na + i] = 0.0;
      }
      break;
    case Kind::ResponseVarying: {
      double a[64], da[64], b[64];
      std::vector<double> heap;
      double* pa = a;
      double* pda = da;
      double* pb = b;
      const auto nb = static_cast<std::size_t>(covariates_.size());
      if (na > 64 || nb > 64) {
        heap.resize(2 * na + nb);
        pa = heap.data();
        pda = pa + na;
        pb = pda + na;
      }
      response_.eval_into(y, {pa, na});
      response_.deriv_into(y, {pda, na});
      covariates_.eval_into(x, {pb, nb});
      if (covariates_.kind() == CovariateBasis::Kind::Linear) {
        for (std::size_t l = 1; l < nb; ++l) pb[l] = -pb[l];
      }
      for (std::size_t l = 0; l < nb; ++l) {
        for (std::size_t m = 0; m < na; ++m) {
          c[l * na + m] = pa[m] * pb[l];
          dc[l * na + m] = pda[m] * pb[l];
        }
      }
      break;
    }
  }
}

ConditionalBasis::Values ConditionalBasis::eval(double y, ConstSpan x) const {
  Values v{Vector(size()), Vector(size())};
  eval_into(y, x, {v.c.data(), static_cast<std::size_t>(size())},
            {v.dc_dy.data(), static_cast<std::size_t>(size())});
  return v;
}

ConditionalBasis::Values conditional_basis_eval(const ConditionalBasis& cb, double y, ConstSpan x) {
  return cb.eval(y, x);
}

double ConditionalBasis::transform(ConstSpan theta, double y, ConstSpan x) const {
  const Values v = eval(y, x);
  return v.c.dot(Eigen::Map<const Vector>(theta.data(), size()));
}

double ConditionalBasis::derivative(ConstSpan theta, double y, ConstSpan x) const {
  const Values v = eval(y, x);
  return v.dc_dy.dot(Eigen::Map<const Vector>(theta.data(), size()));
}

Matrix ConditionalBasis::constraints() const {
  const Matrix d = monotonicity_constraints(response_.order());
  const int na = response_.size();
  int blocks = 1;
  if (kind_ == Kind::ResponseVarying && covariates_.kind() == CovariateBasis::Kind::Bernstein) {
    blocks = covariates_.size();
  }
  Matrix g = Matrix::Zero(d.rows() * blocks, size());
  for (int l = 0; l < blocks; ++l) {
    g.block(l * d.rows(), l * na, d.rows(), na) = d;
  }
  return g;
}

// ---------------------------------------------------------------------------

Inversion invert_monotone(const ConditionalBasis& cb, ConstSpan theta, ConstSpan x, double z) {
  const Support& s = cb.response_basis().support();
  const double lo = s.lo();
  const double hi = s.hi();
  const double f_lo = cb.transform(theta, lo, x);
  const double f_hi = cb.transform(theta, hi, x);
  if (!(f_hi > f_lo)) {
    throw InversionError("transformation is not increasing over its support at this covariate value");
  }
  if (z <= f_lo) return {lo, z < f_lo};
  if (z >= f_hi) return {hi, z > f_hi};

  double a = lo;
  double b = hi;
  const double tol = 1e-10 * s.width();
  while (b - a > tol) {
    const double mid = 0.5 * (a + b);
    if (cb.transform(theta, mid, x) < z) {
      a = mid;
    } else {
      b = mid;
    }
  }
  if (cb.derivative(theta, a, x) < 0.0 || cb.derivative(theta, b, x) < 0.0) {
    throw InversionError("transformation has a negative derivative near the inversion target");
  }
  double y = 0.5 * (a + b);
  for (int it = 0; it < 5; ++it) {
    const double d = cb.derivative(theta, y, x);
    if (!(d > 0.0)) break;
    const double next = y - (cb.transform(theta, y, x) - z) / d;
    if (!(next >= std::max(lo, a - tol) && next <= std::min(hi, b + tol))) break;
    y = next;
  }
  return {y, false};
}

}  // namespace mctm
