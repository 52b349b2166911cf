#include "mctm/model.hpp"

#include "mctm/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mctm {

// --- reference distribution ---------------------------------------------------

double ReferenceDistribution::cdf(double z) const {
  switch (kind_) {
    case Kind::StandardNormal: return std_normal_cdf(z);
    case Kind::Logistic: return 1.0 / (1.0 + std::exp(-z));
    case Kind::MinExtremeValue: return -std::expm1(-std::exp(z));
  }
  return 0.0;
}

double ReferenceDistribution::survival(double z) const {
  switch (kind_) {
    case Kind::StandardNormal: return std_normal_cdf(-z);
    case Kind::Logistic: return 1.0 / (1.0 + std::exp(z));
    case Kind::MinExtremeValue: return std::exp(-std::exp(z));
  }
  return 0.0;
}

double ReferenceDistribution::normal_score(double z, bool* clamped) const {
  if (clamped) *clamped = false;
  if (kind_ == Kind::StandardNormal) return z;
  constexpr double kTiny = 1e-300;
  const double lower = cdf(z);
  if (lower <= 0.5) {
    if (lower < kTiny) {
      if (clamped) *clamped = true;
      return std_normal_quantile(kTiny);
    }
    return std_normal_quantile(lower);
  }
  const double upper = survival(z);
  if (upper < kTiny) {
    if (clamped) *clamped = true;
    return -std_normal_quantile(kTiny);
  }
  return -std_normal_quantile(upper);
}

double ReferenceDistribution::log_density(double z) const {
  switch (kind_) {
    case Kind::StandardNormal: return std_normal_log_pdf(z);
    case Kind::Logistic: {
      // log f = -|z| - 2 log(1 + exp(-|z|)), symmetric and overflow-free
      const double a = std::abs(z);
      return -a - 2.0 * std::log1p(std::exp(-a));
    }
    case Kind::MinExtremeValue: return z - std::exp(z);
  }
  return 0.0;
}

double ReferenceDistribution::density(double z) const { return std::exp(log_density(z)); }

double ReferenceDistribution::quantile(double p) const {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  switch (kind_) {
    case Kind::StandardNormal: return std_normal_quantile(p);
    case Kind::Logistic: return std::log(p / (1.0 - p));
    case Kind::MinExtremeValue: return std::log(-std::log1p(-p));
  }
  return 0.0;
}

std::string ReferenceDistribution::name() const {
  switch (kind_) {
    case Kind::StandardNormal: return "normal";
    case Kind::Logistic: return "logistic";
    case Kind::MinExtremeValue: return "mev";
  }
  return "";
}

ReferenceDistribution ReferenceDistribution::parse(const std::string& name) {
  if (name == "normal" || name == "standard-normal" || name == "probit") return ReferenceDistribution(Kind::StandardNormal);
  if (name == "logistic" || name == "logit") return ReferenceDistribution(Kind::Logistic);
  if (name == "mev" || name == "minimum-extreme-value" || name == "cloglog") {
    return ReferenceDistribution(Kind::MinExtremeValue);
  }
  throw ConfigError("unknown reference distribution '" + name + "'");
}

// --- model spec ------------------------------------------------------------------

ModelSpec::ModelSpec(ReferenceDistribution reference, std::vector<ConditionalBasis> margins,
                     std::vector<LambdaTerm> lambda_terms)
    : reference_(reference), margins_(std::move(margins)), lambda_terms_(std::move(lambda_terms)) {
  const int j_dim = dim();
  if (j_dim < 1) throw ConfigError("model needs at least one margin");
  const auto expected = static_cast<std::size_t>(j_dim * (j_dim - 1) / 2);
  if (lambda_terms_.size() != expected) {
    std::ostringstream msg;
    msg << "model with " << j_dim << " margins needs " << expected << " lambda terms, got " << lambda_terms_.size();
    throw ConfigError(msg.str());
  }
  std::size_t idx = 0;
  for (int j = 1; j < j_dim; ++j) {
    for (int k = 0; k < j; ++k, ++idx) {
      const LambdaTerm& t = lambda_terms_[idx];
      if (t.row != j || t.col != k) throw ConfigError("lambda terms must be listed in row-major lower-triangle order");
    }
  }
}

ModelSpec ModelSpec::with_common_lambda(ReferenceDistribution reference, std::vector<ConditionalBasis> margins,
                                        const CovariateBasis& lambda_basis,
                                        const std::vector<std::pair<int, int>>& fixed_zero) {
  const int j_dim = static_cast<int>(margins.size());
  std::vector<LambdaTerm> terms;
  for (int j = 1; j < j_dim; ++j) {
    for (int k = 0; k < j; ++k) terms.push_back({j, k, lambda_basis, false});
  }
  for (const auto& [j, k] : fixed_zero) {
    if (!(k >= 0 && k < j && j < j_dim)) {
      std::ostringstream msg;
      msg << "fixed-zero entry (" << j + 1 << "," << k + 1 << ") is not below the diagonal";
      throw ConfigError(msg.str());
    }
    terms[static_cast<std::size_t>(lambda_index(j, k))].fixed_zero = true;
  }
  return {reference, std::move(margins), std::move(terms)};
}

const LambdaTerm& ModelSpec::lambda_term(int j, int k) const {
  if (!(k >= 0 && k < j && j < dim())) throw ConfigError("lambda index outside the lower triangle");
  return lambda_terms_[static_cast<std::size_t>(lambda_index(j, k))];
}

int ModelSpec::required_covariates() const {
  int need = 0;
  for (const auto& m : margins_) need = std::max(need, m.required_covariates());
  for (const auto& t : lambda_terms_) {
    if (!t.fixed_zero) need = std::max(need, t.basis.required_covariates());
  }
  return need;
}

// --- layout ---------------------------------------------------------------------

ParamLayout::ParamLayout(const ModelSpec& spec) {
  const int j_dim = spec.dim();
  int offset = 0;
  int rows = 0;
  for (int j = 0; j < j_dim; ++j) {
    margin_offset_.push_back(offset);
    margin_size_.push_back(spec.margin(j).size());
    offset += spec.margin(j).size();
    rows += static_cast<int>(spec.margin(j).constraints().rows());
  }
  lambda_begin_ = offset;
  for (const auto& t : spec.lambda_terms()) {
    if (t.fixed_zero) {
      lambda_offset_.push_back(-1);
      lambda_size_.push_back(0);
    } else {
      lambda_offset_.push_back(offset);
      lambda_size_.push_back(t.basis.size());
      offset += t.basis.size();
    }
  }
  size_ = offset;

  constraints_ = Matrix::Zero(rows, size_);
  int r = 0;
  for (int j = 0; j < j_dim; ++j) {
    const Matrix g = spec.margin(j).constraints();
    constraints_.block(r, margin_offset_[j], g.rows(), g.cols()) = g;
    for (int i = 0; i < g.rows(); ++i) constraint_margin_.push_back(j);
    r += static_cast<int>(g.rows());
  }
}

std::string ParamLayout::label(int index) const {
  if (index < 0 || index >= size_) throw ConfigError("parameter index out of range");
  std::ostringstream out;
  if (index < lambda_begin_) {
    int j = dim() - 1;
    while (margin_offset_[j] > index) --j;
    out << "theta" << j + 1 << "[" << index - margin_offset_[j] << "]";
    return out.str();
  }
  for (int j = 1; j < dim(); ++j) {
    for (int k = 0; k < j; ++k) {
      const int off = lambda_offset(j, k);
      if (off >= 0 && index >= off && index < off + lambda_size(j, k)) {
        out << "lambda" << j + 1 << k + 1 << "[" << index - off << "]";
        return out.str();
      }
    }
  }
  return "?";
}

StructuredParams unpack(const ParamLayout& layout, const Vector& theta) {
  if (theta.size() != layout.size()) throw ConfigError("parameter vector length does not match the model layout");
  StructuredParams out;
  for (int j = 0; j < layout.dim(); ++j) {
    out.margins.push_back(theta.segment(layout.margin_offset(j), layout.margin_size(j)));
  }
  for (int j = 1; j < layout.dim(); ++j) {
    for (int k = 0; k < j; ++k) {
      const int off = layout.lambda_offset(j, k);
      out.lambda.push_back(off < 0 ? Vector() : Vector(theta.segment(off, layout.lambda_size(j, k))));
    }
  }
  return out;
}

Vector pack(const ParamLayout& layout, const StructuredParams& params) {
  if (static_cast<int>(params.margins.size()) != layout.dim() ||
      static_cast<int>(params.lambda.size()) != layout.dim() * (layout.dim() - 1) / 2) {
    throw ConfigError("structured parameters do not match the model layout");
  }
  Vector theta(layout.size());
  for (int j = 0; j < layout.dim(); ++j) {
    if (params.margins[j].size() != layout.margin_size(j)) throw ConfigError("margin block has the wrong length");
    theta.segment(layout.margin_offset(j), layout.margin_size(j)) = params.margins[j];
  }
  for (int j = 1; j < layout.dim(); ++j) {
    for (int k = 0; k < j; ++k) {
      const Vector& g = params.lambda[static_cast<std::size_t>(ModelSpec::lambda_index(j, k))];
      if (g.size() != layout.lambda_size(j, k)) throw ConfigError("lambda block has the wrong length");
      if (g.size() > 0) theta.segment(layout.lambda_offset(j, k), g.size()) = g;
    }
  }
  return theta;
}

// --- Lambda and Sigma -------------------------------------------------------------

LambdaFactor::LambdaFactor(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < 1) throw ConfigError("Lambda must be a non-empty square matrix");
  for (Eigen::Index j = 0; j < m_.rows(); ++j) {
    if (m_(j, j) != 1.0) throw ConfigError("Lambda must have a unit diagonal");
    for (Eigen::Index k = j + 1; k < m_.cols(); ++k) {
      if (m_(j, k) != 0.0) throw ConfigError("Lambda must be lower triangular");
    }
  }
}

LambdaFactor LambdaFactor::identity(int dim) { return LambdaFactor(Matrix::Identity(dim, dim)); }

Matrix LambdaFactor::inverse() const {
  const Eigen::Index n = m_.rows();
  Matrix inv = Matrix::Identity(n, n);
  // Column c of the inverse solves Lambda v = e_c.
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index j = c + 1; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index k = c; k < j; ++k) s += m_(j, k) * inv(k, c);
      inv(j, c) = -s;
    }
  }
  return inv;
}

Vector LambdaFactor::solve(const Vector& z) const {
  Vector v = z;
  for (Eigen::Index j = 1; j < m_.rows(); ++j) {
    for (Eigen::Index k = 0; k < j; ++k) v[j] -= m_(j, k) * v[k];
  }
  return v;
}

LambdaFactor assemble_lambda(const ModelSpec& spec, const Vector& theta, ConstSpan x) {
  const ParamLayout layout(spec);
  if (theta.size() != layout.size()) throw ConfigError("parameter vector length does not match the model layout");
  const int j_dim = spec.dim();
  Matrix m = Matrix::Identity(j_dim, j_dim);
  for (const auto& t : spec.lambda_terms()) {
    if (t.fixed_zero) continue;
    const Vector b = t.basis.eval(x);
    m(t.row, t.col) = b.dot(theta.segment(layout.lambda_offset(t.row, t.col), b.size()));
  }
  return LambdaFactor(std::move(m));
}

CopulaSummary sigma_from_lambda(const LambdaFactor& lambda) {
  const Matrix inv = lambda.inverse();
  CopulaSummary out;
  out.sigma = inv * inv.transpose();
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  out.variances = out.sigma.diagonal();
  const Vector s = out.variances.array().sqrt().inverse();
  out.correlation = s.asDiagonal() * out.sigma * s.asDiagonal();
  out.correlation.diagonal().setOnes();
  return out;
}

double lambda_to_correlation(double lambda) { return -lambda / std::sqrt(1.0 + lambda * lambda); }

// --- building specs from data ------------------------------------------------------

SpecOptions::MarginTerms parse_margin_terms(const std::string& name) {
  using M = SpecOptions::MarginTerms;
  if (name == "unconditional" || name == "none") return M::Unconditional;
  if (name == "shift") return M::Shift;
  if (name == "varying") return M::Varying;
  if (name == "varying-bernstein") return M::VaryingBernstein;
  throw ConfigError("unknown margin terms '" + name + "' (unconditional|shift|varying|varying-bernstein)");
}

SpecOptions::LambdaTerms parse_lambda_terms(const std::string& name) {
  using L = SpecOptions::LambdaTerms;
  if (name == "constant") return L::Constant;
  if (name == "linear") return L::Linear;
  if (name == "bernstein") return L::Bernstein;
  throw ConfigError("unknown lambda terms '" + name + "' (constant|linear|bernstein)");
}

std::string to_string(SpecOptions::MarginTerms terms) {
  switch (terms) {
    case SpecOptions::MarginTerms::Unconditional: return "unconditional";
    case SpecOptions::MarginTerms::Shift: return "shift";
    case SpecOptions::MarginTerms::Varying: return "varying";
    case SpecOptions::MarginTerms::VaryingBernstein: return "varying-bernstein";
  }
  return "";
}

std::string to_string(SpecOptions::LambdaTerms terms) {
  switch (terms) {
    case SpecOptions::LambdaTerms::Constant: return "constant";
    case SpecOptions::LambdaTerms::Linear: return "linear";
    case SpecOptions::LambdaTerms::Bernstein: return "bernstein";
  }
  return "";
}

ModelSpec build_spec(const Dataset& data, const SpecOptions& options) {
  const int j_dim = data.dim();
  const int p = data.covariates();
  auto all_columns = [p] {
    std::vector<int> cols;
    for (int c = 0; c < p; ++c) cols.push_back(c);
    return cols;
  };
  for (int c : options.margin_covariates) {
    if (c < 0 || c >= p) throw ConfigError("margin covariate column out of range");
  }
  for (int c : options.lambda_covariates) {
    if (c < 0 || c >= p) throw ConfigError("lambda covariate column out of range");
  }
  const std::vector<int> margin_cols = options.margin_covariates.empty() ? all_columns() : options.margin_covariates;

  std::vector<ConditionalBasis> margins;
  for (int j = 0; j < j_dim; ++j) {
    Support support = data.response_support(j, options.support_margin);
    if (static_cast<int>(options.response_supports.size()) > j && options.response_supports[j]) {
      support = *options.response_supports[j];
    }
    BernsteinBasis a(options.margin_order, support);
    using M = SpecOptions::MarginTerms;
    if (options.margin_terms != M::Unconditional && margin_cols.empty()) {
      throw ConfigError("conditional margins need at least one covariate");
    }
    switch (options.margin_terms) {
      case M::Unconditional:
        margins.push_back(ConditionalBasis::unconditional(a));
        break;
      case M::Shift:
        margins.push_back(ConditionalBasis::additive_shift(a, margin_cols));
        break;
      case M::Varying:
        margins.push_back(ConditionalBasis::response_varying(a, CovariateBasis::linear(margin_cols)));
        break;
      case M::VaryingBernstein: {
        const int c = margin_cols.front();
        margins.push_back(ConditionalBasis::response_varying(
            a, CovariateBasis::bernstein(c, options.margin_covariate_order, data.covariate_support(c))));
        break;
      }
    }
  }

  CovariateBasis lambda_basis = CovariateBasis::intercept();
  switch (options.lambda_terms) {
    case SpecOptions::LambdaTerms::Constant:
      break;
    case SpecOptions::LambdaTerms::Linear: {
      const std::vector<int> cols = options.lambda_covariates.empty() ? all_columns() : options.lambda_covariates;
      if (cols.empty()) throw ConfigError("linear lambda terms need at least one covariate");
      lambda_basis = CovariateBasis::linear(cols);
      break;
    }
    case SpecOptions::LambdaTerms::Bernstein: {
      if (p == 0) throw ConfigError("Bernstein lambda terms need a covariate");
      const int c = options.lambda_covariates.empty() ? 0 : options.lambda_covariates.front();
      lambda_basis = CovariateBasis::bernstein(c, options.lambda_order, data.covariate_support(c));
      break;
    }
  }
  return ModelSpec::with_common_lambda(options.reference, std::move(margins), lambda_basis, options.fixed_zero);
}

}  // namespace mctm
