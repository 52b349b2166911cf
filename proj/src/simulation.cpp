#include "mctm/simulation.hpp"

#include "mctm/normal.hpp"
#include "mctm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mctm {

void DagumParams::validate() const {
  if (!(a > 0.0 && b > 0.0 && p > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(p)) {
    throw ConfigError("Dagum parameters a, b, p must be finite and positive");
  }
}

double dagum_cdf(const DagumParams& params, double y) {
  params.validate();
  if (!(y > 0.0)) {
    if (y == 0.0) return 0.0;
    throw ConfigError("Dagum CDF is defined for y > 0");
  }
  if (std::isinf(y)) return 1.0;
  return std::pow(1.0 + std::pow(y / params.b, -params.a), -params.p);
}

double dagum_quantile(const DagumParams& params, double u) {
  params.validate();
  if (!(u > 0.0 && u < 1.0)) throw ConfigError("Dagum quantile needs u in (0, 1)");
  // u^(-1/p) - 1 loses precision for u near 1; expm1 keeps it.
  const double t = std::expm1(-std::log(u) / params.p);
  return params.b * std::pow(t, -1.0 / params.a);
}

const std::array<DagumParams, 3>& simulation_dagum_params() {
  static const std::array<DagumParams, 3> params = {
      DagumParams{std::exp(2.0), std::exp(1.0), std::exp(1.3)},
      DagumParams{std::exp(1.8), std::exp(0.0), std::exp(0.9)},
      DagumParams{std::exp(1.5), std::exp(-0.9), std::exp(1.0)},
  };
  return params;
}

SimVariant parse_sim_variant(const std::string& name) {
  if (name == "bivariate") return SimVariant::Bivariate;
  if (name == "trivariate") return SimVariant::Trivariate;
  if (name == "highdim") return SimVariant::HighDim;
  throw ConfigError("unknown simulation design '" + name + "' (bivariate, trivariate, highdim)");
}

std::string to_string(SimVariant v) {
  switch (v) {
    case SimVariant::Bivariate: return "bivariate";
    case SimVariant::Trivariate: return "trivariate";
    case SimVariant::HighDim: return "highdim";
  }
  return "";
}

void SimDesign::validate() const {
  if (n < 2) throw ConfigError("simulation sample size must be at least 2");
  if (R < 1) throw ConfigError("number of replicates must be at least 1");
  if (variant == SimVariant::HighDim && dim != 5 && dim != 10) {
    throw ConfigError("the high-dimensional design has 5 or 10 responses");
  }
}

int SimDesign::response_dim() const {
  switch (variant) {
    case SimVariant::Bivariate: return 2;
    case SimVariant::Trivariate: return 3;
    case SimVariant::HighDim: return dim;
  }
  return 0;
}

double SimTruth::lambda(int j, int k, double x) const {
  if (j == 1 && k == 0) return x * x;
  if (j == 2 && k == 0 && dim >= 3) return -x;
  if (j == 2 && k == 1 && dim >= 3) return x * x * x - x;
  return 0.0;
}

LambdaFactor SimTruth::lambda_factor(double x) const {
  Matrix m = Matrix::Identity(dim, dim);
  for (int j = 1; j < dim; ++j) {
    for (int k = 0; k < j; ++k) m(j, k) = lambda(j, k, x);
  }
  return LambdaFactor(std::move(m));
}

CopulaSummary SimTruth::sigma(double x) const { return sigma_from_lambda(lambda_factor(x)); }

SimTruth simulation_truth(const SimDesign& design) {
  design.validate();
  SimTruth t;
  t.dim = design.response_dim();
  const auto& base = simulation_dagum_params();
  // Components beyond the third reuse the three marginal parameter sets in turn.
  for (int j = 0; j < t.dim; ++j) t.margins.push_back(base[static_cast<std::size_t>(j % 3)]);
  return t;
}

Vector draw_responses(const SimTruth& truth, double x, CounterRng& rng) {
  std::normal_distribution<double> normal;
  Vector z(truth.dim);
  for (auto& v : z) v = normal(rng);
  const LambdaFactor lambda = truth.lambda_factor(x);
  const Vector zt = lambda.solve(z);
  const CopulaSummary cs = sigma_from_lambda(lambda);
  Vector y(truth.dim);
  for (int j = 0; j < truth.dim; ++j) {
    // Clamp away from 0 and 1 so the quantile stays finite.
    const double u = std::clamp(std_normal_cdf(zt[j] / std::sqrt(cs.variances[j])), 1e-300, 1.0 - 1e-16);
    y[j] = dagum_quantile(truth.margins[static_cast<std::size_t>(j)], u);
  }
  return y;
}

Dataset generate_replicate(const SimDesign& design, int r) {
  const SimTruth truth = simulation_truth(design);
  CounterRng rng(CounterRng::derive(design.seed, static_cast<std::uint64_t>(r)), 0);
  std::uniform_real_distribution<double> unif(truth.x_lo, truth.x_hi);
  RowMatrix y(design.n, truth.dim);
  RowMatrix x(design.n, 1);
  for (int i = 0; i < design.n; ++i) {
    x(i, 0) = unif(rng);
    y.row(i) = draw_responses(truth, x(i, 0), rng).transpose();
  }
  std::vector<std::string> names;
  for (int j = 0; j < truth.dim; ++j) names.push_back("y" + std::to_string(j + 1));
  return Dataset(std::move(y), std::move(x), names, {"x"});
}

Simulation generate(const SimDesign& design) {
  design.validate();
  Simulation sim;
  sim.truth = simulation_truth(design);
  sim.datasets.resize(static_cast<std::size_t>(design.R));
  parallel_for(design.R, [&](int r) { sim.datasets[static_cast<std::size_t>(r)] = generate_replicate(design, r); });
  return sim;
}

double rmse_curve(const std::function<double(double)>& truth, const std::function<double(double)>& estimate,
                  double lo, double hi, int G) {
  if (G < 2) throw ConfigError("RMSE grid needs at least two points");
  if (!(hi > lo)) throw ConfigError("RMSE grid needs lo < hi");
  double acc = 0.0;
  for (int g = 0; g < G; ++g) {
    const double x = lo + (hi - lo) * g / (G - 1);
    const double d = truth(x) - estimate(x);
    acc += d * d;
  }
  return std::sqrt(acc / G);
}

ModelSpec simulation_model_spec(const Dataset& data, int margin_order, int lambda_order, bool varying_margins) {
  SpecOptions o;
  o.margin_order = margin_order;
  o.margin_terms = varying_margins ? SpecOptions::MarginTerms::VaryingBernstein : SpecOptions::MarginTerms::Unconditional;
  o.margin_covariates = {0};
  o.margin_covariate_order = 3;
  o.lambda_terms = SpecOptions::LambdaTerms::Bernstein;
  o.lambda_order = lambda_order;
  o.lambda_covariates = {0};
  return build_spec(data, o);
}

}  // namespace mctm
