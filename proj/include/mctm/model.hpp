#ifndef MCTM_MODEL_HPP
#define MCTM_MODEL_HPP

#include "mctm/basis.hpp"
#include "mctm/common.hpp"
#include "mctm/dataset.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mctm {

/// Reference distribution P_Z of the marginal transformations.
class ReferenceDistribution {
 public:
  enum class Kind { StandardNormal, Logistic, MinExtremeValue };

  ReferenceDistribution() = default;
  explicit ReferenceDistribution(Kind kind) : kind_(kind) {}

  Kind kind() const { return kind_; }
  bool is_normal() const { return kind_ == Kind::StandardNormal; }

  double cdf(double z) const;
  double survival(double z) const;  // 1 - cdf, accurate in the upper tail
  double density(double z) const;
  double log_density(double z) const;
  double quantile(double p) const;
  /// Phi^{-1}(F_Z(z)) computed from whichever tail is smaller. Sets *clamped
  /// when F_Z(z) underflows to 0 or 1.
  double normal_score(double z, bool* clamped = nullptr) const;

  std::string name() const;
  /// Accepts "normal", "logistic", "mev" (and a few long-form aliases).
  static ReferenceDistribution parse(const std::string& name);

  friend bool operator==(const ReferenceDistribution&, const ReferenceDistribution&) = default;

 private:
  Kind kind_ = Kind::StandardNormal;
};

/// Covariate basis of one sub-diagonal entry lambda_jk(x) = b(x)' gamma_jk.
struct LambdaTerm {
  int row = 0;  // j, 0-based
  int col = 0;  // k < j, 0-based
  CovariateBasis basis = CovariateBasis::intercept();
  bool fixed_zero = false;

  friend bool operator==(const LambdaTerm&, const LambdaTerm&) = default;
};

/// Declarative model description: reference distribution, one conditional
/// basis per margin and a covariate basis for every entry of Lambda below
/// the diagonal. Response indices are 0-based throughout the library.
class ModelSpec {
 public:
  ModelSpec(ReferenceDistribution reference, std::vector<ConditionalBasis> margins,
            std::vector<LambdaTerm> lambda_terms);

  /// Every free entry shares `lambda_basis`; `fixed_zero` lists (j, k) pairs with k < j.
  static ModelSpec with_common_lambda(ReferenceDistribution reference, std::vector<ConditionalBasis> margins,
                                      const CovariateBasis& lambda_basis,
                                      const std::vector<std::pair<int, int>>& fixed_zero = {});

  int dim() const { return static_cast<int>(margins_.size()); }
  const ReferenceDistribution& reference() const { return reference_; }
  const std::vector<ConditionalBasis>& margins() const { return margins_; }
  const ConditionalBasis& margin(int j) const { return margins_.at(static_cast<std::size_t>(j)); }

  /// Terms in row-major lower-triangle order: (1,0), (2,0), (2,1), (3,0), ...
  const std::vector<LambdaTerm>& lambda_terms() const { return lambda_terms_; }
  const LambdaTerm& lambda_term(int j, int k) const;
  static int lambda_index(int j, int k) { return j * (j - 1) / 2 + k; }

  int required_covariates() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

 private:
  ReferenceDistribution reference_;
  std::vector<ConditionalBasis> margins_;
  std::vector<LambdaTerm> lambda_terms_;
};

/// Flat parameter layout: margin blocks theta_1..theta_J, then the gamma
/// blocks of the free Lambda entries in row-major lower-triangle order.
class ParamLayout {
 public:
  explicit ParamLayout(const ModelSpec& spec);

  int size() const { return size_; }
  int dim() const { return static_cast<int>(margin_offset_.size()); }
  int margin_offset(int j) const { return margin_offset_[j]; }
  int margin_size(int j) const { return margin_size_[j]; }
  int lambda_block_offset() const { return lambda_begin_; }
  /// Offset of gamma_jk, or -1 when the entry is fixed at zero.
  int lambda_offset(int j, int k) const { return lambda_offset_[ModelSpec::lambda_index(j, k)]; }
  int lambda_size(int j, int k) const { return lambda_size_[ModelSpec::lambda_index(j, k)]; }

  /// Human-readable label with 1-based indices, e.g. "theta2[3]" or "lambda21[0]".
  std::string label(int index) const;

  /// Rows G over the full parameter vector with G theta > 0 for monotone margins.
  const Matrix& constraint_matrix() const { return constraints_; }
  /// Margin each constraint row belongs to.
  const std::vector<int>& constraint_margin() const { return constraint_margin_; }

 private:
  int size_ = 0;
  int lambda_begin_ = 0;
  std::vector<int> margin_offset_;
  std::vector<int> margin_size_;
  std::vector<int> lambda_offset_;
  std::vector<int> lambda_size_;
  Matrix constraints_;
  std::vector<int> constraint_margin_;
};

/// Structured view of a parameter vector.
struct StructuredParams {
  std::vector<Vector> margins;  // theta_j
  std::vector<Vector> lambda;   // gamma_jk per lambda term (empty when fixed at zero)
};

StructuredParams unpack(const ParamLayout& layout, const Vector& theta);
Vector pack(const ParamLayout& layout, const StructuredParams& params);

/// Unit lower-triangular J x J matrix.
class LambdaFactor {
 public:
  explicit LambdaFactor(Matrix m);
  static LambdaFactor identity(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(int j, int k) const { return m_(j, k); }

  /// Lambda^{-1} by forward substitution (again unit lower triangular).
  Matrix inverse() const;
  /// Solves Lambda v = z.
  Vector solve(const Vector& z) const;
  /// P = Lambda' Lambda, the precision matrix of the latent vector.
  Matrix precision() const { return m_.transpose() * m_; }

 private:
  Matrix m_;
};

LambdaFactor assemble_lambda(const ModelSpec& spec, const Vector& theta, ConstSpan x);

struct CopulaSummary {
  Matrix sigma;        // Lambda^{-1} Lambda^{-T}
  Vector variances;    // diag(sigma)
  Matrix correlation;  // S sigma S, S = diag(1 / sd)
};

CopulaSummary sigma_from_lambda(const LambdaFactor& lambda);

/// Correlation of the bivariate model with Lambda = [[1, 0], [lambda, 1]].
double lambda_to_correlation(double lambda);

/// Options for deriving a ModelSpec from data.
struct SpecOptions {
  enum class MarginTerms { Unconditional, Shift, Varying, VaryingBernstein };
  enum class LambdaTerms { Constant, Linear, Bernstein };

  ReferenceDistribution reference;
  int margin_order = 6;
  MarginTerms margin_terms = MarginTerms::Unconditional;
  std::vector<int> margin_covariates;  // empty: all covariates
  int margin_covariate_order = 3;      // VaryingBernstein only
  LambdaTerms lambda_terms = LambdaTerms::Constant;
  int lambda_order = 6;
  std::vector<int> lambda_covariates;  // empty: all (Linear), first covariate (Bernstein)
  std::vector<std::pair<int, int>> fixed_zero;  // 0-based (j, k), k < j
  double support_margin = 0.0;  // fraction of each data range added on both sides
  std::vector<std::optional<Support>> response_supports;  // per response overrides
};

SpecOptions::MarginTerms parse_margin_terms(const std::string& name);
SpecOptions::LambdaTerms parse_lambda_terms(const std::string& name);
std::string to_string(SpecOptions::MarginTerms terms);
std::string to_string(SpecOptions::LambdaTerms terms);

/// Supports default to the data range of each column.
ModelSpec build_spec(const Dataset& data, const SpecOptions& options);

}  // namespace mctm

#endif
