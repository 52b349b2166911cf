#ifndef MCTM_BOOTSTRAP_HPP
#define MCTM_BOOTSTRAP_HPP

#include "mctm/common.hpp"
#include "mctm/estimation.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace mctm {

struct BootstrapResult {
  std::string method;              // "refit" or "asymptotic"
  Vector estimate;                 // the original estimate
  std::vector<Vector> replicates;  // indexed by replicate
  std::vector<bool> converged;     // only converged replicates enter summaries
  int rejected_draws = 0;          // asymptotic draws violating monotonicity
  std::vector<std::string> warnings;

  int usable() const;
};

/// Parametric bootstrap: B samples at the covariate rows X from the fitted
/// model, each refitted with `options` (started at the original estimate
/// unless options.start is set). Replicate b uses a stream derived from
/// (seed, b), so results do not depend on the number of workers.
BootstrapResult parametric_bootstrap(const FittedModel& fitted, const RowMatrix& X, int B, std::uint64_t seed,
                                     const FitOptions& options = {});

/// B draws from N(theta_hat, vcov); draws violating the monotonicity
/// constraints are rejected and redrawn. Constraints active at theta_hat
/// (D theta <= 1e-6) are held fixed by conditioning vcov on them.
BootstrapResult asymptotic_draws(const FittedModel& fitted, int B, std::uint64_t seed);

/// A scalar summary of a model at a grid point, e.g. Spearman's rho at x = g.
using Functional = std::function<double(const FittedModel& model, double grid_point)>;

/// Covariate vector `base` with entry `column` replaced by the grid point.
Functional lambda_functional(int j, int k, Vector base, int column);
Functional spearman_functional(int j, int k, Vector base, int column);
Functional kendall_functional(int j, int k, Vector base, int column);

struct BandCurve {
  Vector grid;
  Vector estimate;  // functional at the original estimate
  Vector mean;      // replicate mean
  Vector lower;
  Vector upper;
  int replicates = 0;
  double level = 0.95;
};

/// Replicate values (usable replicates x grid points).
Matrix functional_samples(const BootstrapResult& result, const ModelSpec& spec, const Functional& f,
                          const Vector& grid);

/// Pointwise percentile intervals. Throws ConfigError for fewer than 20 usable replicates.
BandCurve summarize(const BootstrapResult& result, const ModelSpec& spec, const Functional& f, const Vector& grid,
                    double level = 0.95);

/// Type-7 sample quantile of unsorted values.
double sample_quantile(std::vector<double> values, double p);

/// CSV with columns functional, grid, estimate, mean, lower, upper.
void write_bands_csv(std::ostream& out, const std::vector<std::pair<std::string, BandCurve>>& bands);

}  // namespace mctm

#endif
