#ifndef MCTM_BASIS_HPP
#define MCTM_BASIS_HPP

#include "mctm/common.hpp"

#include <vector>

namespace mctm {

/// Closed interval [lo, hi] on which a Bernstein basis lives.
class Support {
 public:
  Support(double lo, double hi);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double width() const { return hi_ - lo_; }
  bool contains(double y) const { return y >= lo_ && y <= hi_; }

  /// Support of `values` widened by `margin` times its range on both sides.
  static Support from_range(ConstSpan values, double margin = 0.0);

  friend bool operator==(const Support&, const Support&) = default;

 private:
  double lo_;
  double hi_;
};

/// Bernstein polynomial basis of order M on a support interval.
///
/// Uses the unnormalised form b_{m,M}(u) = C(M,m) u^m (1-u)^(M-m) with
/// u = (y - lo) / (hi - lo). The beta-density form differs by the constant
/// factor (M + 1), which the coefficients absorb; with this choice the
/// coefficients live on the scale of the transformation itself and the basis
/// is a partition of unity.
///
/// Points outside the support are clamped to the nearest endpoint for
/// evaluation; the derivative is zero there.
class BernsteinBasis {
 public:
  BernsteinBasis(int order, Support support);

  int order() const { return order_; }
  int size() const { return order_ + 1; }
  const Support& support() const { return support_; }

  Vector eval(double y) const;
  Vector deriv(double y) const;

  // Allocation-free variants; `out` must have size() entries.
  void eval_into(double y, std::span<double> out) const;
  void deriv_into(double y, std::span<double> out) const;

  friend bool operator==(const BernsteinBasis&, const BernsteinBasis&) = default;

 private:
  int order_;
  Support support_;
  std::vector<double> binom_;       // C(M, m)
  std::vector<double> binom_lower_; // C(M-1, m)
};

/// M x (M+1) first-difference matrix D with (D theta)_m = theta_{m+1} - theta_m.
Matrix monotonicity_constraints(int order);

/// Basis in the covariates only: intercept, linear (1, x_c...) or Bernstein in one covariate.
class CovariateBasis {
 public:
  enum class Kind { Intercept, Linear, Bernstein };

  static CovariateBasis intercept();
  static CovariateBasis linear(std::vector<int> columns);
  static CovariateBasis bernstein(int column, int order, Support support);

  Kind kind() const { return kind_; }
  int size() const;
  const std::vector<int>& columns() const { return columns_; }
  const BernsteinBasis& bernstein_basis() const;

  /// Smallest covariate row length this basis can be evaluated on.
  int required_covariates() const;

  void eval_into(ConstSpan x, std::span<double> out) const;
  Vector eval(ConstSpan x) const;

  friend bool operator==(const CovariateBasis&, const CovariateBasis&) = default;

 private:
  CovariateBasis(Kind kind, std::vector<int> columns, std::vector<BernsteinBasis> bernstein)
      : kind_(kind), columns_(std::move(columns)), bernstein_(std::move(bernstein)) {}

  Kind kind_;
  std::vector<int> columns_;
  std::vector<BernsteinBasis> bernstein_;  // zero or one entry
};

/// Conditional basis c(y, x) of one marginal transformation, h(y | x) = c(y, x)' theta.
///
///   Unconditional:    c = a(y)
///   AdditiveShift:    c = (a(y), -x_c...)        so theta = (theta_1, beta) gives a' theta_1 - x' beta
///   ResponseVarying:  c = (a(y) b_1(x), ..., a(y) b_L(x))
///
/// For response-varying terms with a linear covariate basis (1, x_c...), the
/// non-intercept covariate entries enter with a negative sign, so the block
/// for covariate c holds beta_c in a(y)' theta_1 - a(y)' beta_c x_c. The
/// coefficient vector is stored block-wise: L blocks of M+1 entries.
class ConditionalBasis {
 public:
  enum class Kind { Unconditional, AdditiveShift, ResponseVarying };

  static ConditionalBasis unconditional(BernsteinBasis response);
  static ConditionalBasis additive_shift(BernsteinBasis response, std::vector<int> columns);
  static ConditionalBasis response_varying(BernsteinBasis response, CovariateBasis covariates);

  Kind kind() const { return kind_; }
  int size() const;
  const BernsteinBasis& response_basis() const { return response_; }
  const CovariateBasis& covariate_basis() const { return covariates_; }
  const std::vector<int>& shift_columns() const { return shift_columns_; }
  int required_covariates() const;

  /// Fills c(y, x) and its y-partial derivative; spans must have size() entries.
  void eval_into(double y, ConstSpan x, std::span<double> c, std::span<double> dc) const;

  struct Values {
    Vector c;
    Vector dc_dy;
  };
  Values eval(double y, ConstSpan x) const;

  double transform(ConstSpan theta, double y, ConstSpan x) const;
  double derivative(ConstSpan theta, double y, ConstSpan x) const;

  /// Rows G with G theta > 0 implying a monotone transformation (see class docs).
  ///
  /// Unconditional and shift terms constrain the response block; response-varying
  /// terms with a Bernstein covariate basis constrain every block (monotone for
  /// every x), with a linear covariate basis only the intercept block.
  Matrix constraints() const;

  friend bool operator==(const ConditionalBasis&, const ConditionalBasis&) = default;

 private:
  ConditionalBasis(Kind kind, BernsteinBasis response, CovariateBasis covariates,
                   std::vector<int> shift_columns)
      : kind_(kind),
        response_(std::move(response)),
        covariates_(std::move(covariates)),
        shift_columns_(std::move(shift_columns)) {}

  Kind kind_;
  BernsteinBasis response_;
  CovariateBasis covariates_;
  std::vector<int> shift_columns_;
};

Vector bernstein_eval(double y, const BernsteinBasis& basis);
Vector bernstein_deriv(double y, const BernsteinBasis& basis);
ConditionalBasis::Values conditional_basis_eval(const ConditionalBasis& cb, double y, ConstSpan x);

struct Inversion {
  double y = 0.0;
  bool clamped = false;  // target outside the transformation's range on the support
};

/// Solves c(y, x)' theta = z for y on the response support.
///
/// Bisection down to a 1e-10 bracket (relative to the support width), then
/// five safeguarded Newton steps. Targets beyond the range clamp to the
/// support endpoint. Throws InversionError if the transform decreases.
Inversion invert_monotone(const ConditionalBasis& cb, ConstSpan theta, ConstSpan x, double z);

}  // namespace mctm

#endif
