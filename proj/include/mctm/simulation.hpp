#ifndef MCTM_SIMULATION_HPP
#define MCTM_SIMULATION_HPP

#include "mctm/common.hpp"
#include "mctm/dataset.hpp"
#include "mctm/model.hpp"
#include "mctm/parallel.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mctm {

/// Dagum distribution F(y) = (1 + (y / b)^(-a))^(-p), y > 0.
struct DagumParams {
  double a = 1.0;
  double b = 1.0;
  double p = 1.0;

  void validate() const;
};

double dagum_cdf(const DagumParams& params, double y);
double dagum_quantile(const DagumParams& params, double u);

/// Marginal parameters of the first three simulated responses:
/// (e^2, e^1, e^1.3), (e^1.8, e^0, e^0.9), (e^1.5, e^-0.9, e^1).
const std::array<DagumParams, 3>& simulation_dagum_params();

enum class SimVariant { Bivariate, Trivariate, HighDim };

SimVariant parse_sim_variant(const std::string& name);
std::string to_string(SimVariant v);

struct SimDesign {
  SimVariant variant = SimVariant::Bivariate;
  int dim = 5;  // HighDim only: 5 or 10
  int n = 1000;
  int R = 100;
  std::uint64_t seed = 1;

  void validate() const;
  int response_dim() const;
};

/// True data-generating structure. Lambda(x) has lambda21 = x^2 and, from
/// three responses on, lambda31 = -x and lambda32 = x^3 - x; all other
/// entries are zero. Response j has Dagum margin margins[j].
struct SimTruth {
  int dim = 2;
  std::vector<DagumParams> margins;
  double x_lo = -0.9;
  double x_hi = 0.9;

  double lambda(int j, int k, double x) const;
  LambdaFactor lambda_factor(double x) const;
  CopulaSummary sigma(double x) const;
};

SimTruth simulation_truth(const SimDesign& design);

/// One response vector at covariate x: z ~ N(0, I), latent Lambda(x)^{-1} z,
/// y_j = F_j^{-1}(Phi(latent_j / sigma_j(x))).
Vector draw_responses(const SimTruth& truth, double x, CounterRng& rng);

/// Replicate r: x ~ U[-0.9, 0.9], z ~ N(0, I), latent Lambda(x)^{-1} z and
/// y_j = F_j^{-1}(Phi(latent_j / sigma_j(x))). Columns y1..yJ, covariate x.
Dataset generate_replicate(const SimDesign& design, int r);

struct Simulation {
  std::vector<Dataset> datasets;
  SimTruth truth;
};

Simulation generate(const SimDesign& design);

/// Root of the mean squared difference over G equispaced points of [lo, hi].
double rmse_curve(const std::function<double(double)>& truth, const std::function<double(double)>& estimate,
                  double lo = -0.9, double hi = 0.9, int G = 100);

/// Model for simulated data: unconditional order-`margin_order` Bernstein
/// margins (or, with `varying_margins`, coefficients varying with x through an
/// order-3 Bernstein basis) and every lambda entry Bernstein of order
/// `lambda_order` in x. Supports come from the data.
ModelSpec simulation_model_spec(const Dataset& data, int margin_order = 6, int lambda_order = 3,
                                bool varying_margins = false);

}  // namespace mctm

#endif
