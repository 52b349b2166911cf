#include "mctm/bootstrap.hpp"

#include "mctm/distribution.hpp"
#include "mctm/io.hpp"
#include "mctm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/QR>
#include <ostream>
#include <random>

namespace mctm {

namespace {

constexpr double kActiveTolerance = 1e-6;

std::vector<double> with_grid_point(const Vector& base, int column, double g) {
  std::vector<double> x(base.data(), base.data() + base.size());
  if (column < 0 || column >= static_cast<int>(x.size())) throw ConfigError("functional covariate column out of range");
  x[static_cast<std::size_t>(column)] = g;
  return x;
}

std::string percent(double share) { return std::to_string(static_cast<int>(std::lround(100.0 * share))) + "%"; }

}  // namespace

int BootstrapResult::usable() const { return static_cast<int>(std::count(converged.begin(), converged.end(), true)); }

BootstrapResult parametric_bootstrap(const FittedModel& fitted, const RowMatrix& X, int B, std::uint64_t seed,
                                     const FitOptions& options) {
  if (B < 1) throw ConfigError("number of bootstrap replicates must be at least 1");
  if (!fitted.converged()) throw ConfigError("parametric bootstrap needs a converged fit");
  if (X.rows() < 1) throw ConfigError("covariate matrix must have at least one row");
  BootstrapResult out;
  out.method = "refit";
  out.estimate = fitted.theta;
  out.replicates.assign(static_cast<std::size_t>(B), Vector());
  std::vector<char> ok(static_cast<std::size_t>(B), 0);
  FitOptions opt = options;
  opt.compute_vcov = false;
  if (!opt.start) opt.start = fitted.theta;
  const int n = static_cast<int>(X.rows());
  parallel_for(B, [&](int b) {
    const SampleResult s = sample(fitted, n, X, CounterRng::derive(seed, static_cast<std::uint64_t>(b)));
    if (!s.failed_rows.empty()) return;
    const Dataset data(s.Y, X);
    const FittedModel m = fit(fitted.spec, data, opt);
    out.replicates[static_cast<std::size_t>(b)] = m.theta;
    ok[static_cast<std::size_t>(b)] = m.converged() ? 1 : 0;
  });
  out.converged.assign(ok.begin(), ok.end());
  const int failed = B - out.usable();
  if (failed > 0) {
    out.warnings.push_back(std::to_string(failed) + " of " + std::to_string(B) +
                           " replicates did not converge and were excluded");
  }
  if (failed > 0.1 * B) out.warnings.push_back("more than 10% of bootstrap refits failed (" + percent(double(failed) / B) + ")");
  return out;
}

BootstrapResult asymptotic_draws(const FittedModel& fitted, int B, std::uint64_t seed) {
  if (B < 1) throw ConfigError("number of draws must be at least 1");
  if (fitted.vcov.size() == 0) throw ConfigError("asymptotic draws need a covariance matrix");
  const ParamLayout layout(fitted.spec);
  const Matrix& a = layout.constraint_matrix();
  // Differences sitting on the boundary stay there: condition the normal
  // approximation on the active rows, as for an equality-constrained estimate.
  Matrix cov = fitted.vcov;
  Matrix aa;
  Matrix gain;  // maps active-row residuals back onto the active set
  std::vector<Eigen::Index> active;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    if (a.row(r).dot(fitted.theta) <= kActiveTolerance) active.push_back(r);
  }
  if (!active.empty()) {
    aa.resize(static_cast<Eigen::Index>(active.size()), a.cols());
    for (std::size_t i = 0; i < active.size(); ++i) aa.row(static_cast<Eigen::Index>(i)) = a.row(active[i]);
    const Matrix va = cov * aa.transpose();
    const Matrix s = aa * va;
    gain = va * Eigen::CompleteOrthogonalDecomposition<Matrix>(s).pseudoInverse();
    cov -= gain * va.transpose();
    cov = 0.5 * (cov + cov.transpose());
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.eigenvalues().minCoeff() < -1e-8 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
    throw NumericalError("covariance matrix is not positive semidefinite");
  }
  const Matrix root = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  BootstrapResult out;
  out.method = "asymptotic";
  out.estimate = fitted.theta;
  constexpr int kMaxAttempts = 1000;
  for (int b = 0; b < B; ++b) {
    CounterRng rng(CounterRng::derive(seed, static_cast<std::uint64_t>(b)), 0);
    std::normal_distribution<double> normal;
    bool accepted = false;
    Vector draw(fitted.theta.size());
    for (int attempt = 0; attempt < kMaxAttempts && !accepted; ++attempt) {
      Vector z(fitted.theta.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
      draw = fitted.theta + root * z;
      if (!active.empty()) draw -= gain * (aa * (draw - fitted.theta));
      accepted = a.rows() == 0 || (a * draw).minCoeff() > 0.0;
      if (!accepted) ++out.rejected_draws;
    }
    out.replicates.push_back(draw);
    out.converged.push_back(accepted);
  }
  const double rate = static_cast<double>(out.rejected_draws) / (out.rejected_draws + B);
  if (rate > 0.5) {
    out.warnings.push_back("rejected " + percent(rate) +
                           " of draws for violating monotonicity; the normal approximation is unreliable near the boundary");
  }
  return out;
}

Functional lambda_functional(int j, int k, Vector base, int column) {
  return [=](const FittedModel& m, double g) {
    const std::vector<double> x = with_grid_point(base, column, g);
    return assemble_lambda(m.spec, m.theta, x)(j, k);
  };
}

Functional spearman_functional(int j, int k, Vector base, int column) {
  return [=](const FittedModel& m, double g) {
    return dependence_measures(m, with_grid_point(base, column, g), j, k).spearman;
  };
}

Functional kendall_functional(int j, int k, Vector base, int column) {
  return [=](const FittedModel& m, double g) {
    return dependence_measures(m, with_grid_point(base, column, g), j, k).kendall;
  };
}

Matrix functional_samples(const BootstrapResult& result, const ModelSpec& spec, const Functional& f,
                          const Vector& grid) {
  Matrix values(result.usable(), grid.size());
  Eigen::Index row = 0;
  for (std::size_t b = 0; b < result.replicates.size(); ++b) {
    if (!result.converged[b]) continue;
    const FittedModel m = model_at(spec, result.replicates[b]);
    for (Eigen::Index g = 0; g < grid.size(); ++g) values(row, g) = f(m, grid[g]);
    ++row;
  }
  return values;
}

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BandCurve summarize(const BootstrapResult& result, const ModelSpec& spec, const Functional& f, const Vector& grid,
                    double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("interval level must lie in (0, 1)");
  if (result.usable() < 20) {
    throw ConfigError("at least 20 usable replicates are needed for intervals, got " + std::to_string(result.usable()));
  }
  const Matrix values = functional_samples(result, spec, f, grid);
  const FittedModel at_estimate = model_at(spec, result.estimate);
  BandCurve band;
  band.grid = grid;
  band.level = level;
  band.replicates = static_cast<int>(values.rows());
  band.estimate.resize(grid.size());
  band.mean.resize(grid.size());
  band.lower.resize(grid.size());
  band.upper.resize(grid.size());
  const double alpha = 1.0 - level;
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    std::vector<double> column(values.col(g).data(), values.col(g).data() + values.rows());
    band.estimate[g] = f(at_estimate, grid[g]);
    band.mean[g] = values.col(g).mean();
    band.lower[g] = sample_quantile(column, alpha / 2.0);
    band.upper[g] = sample_quantile(column, 1.0 - alpha / 2.0);
  }
  return band;
}

void write_bands_csv(std::ostream& out, const std::vector<std::pair<std::string, BandCurve>>& bands) {
  out << "functional,grid,estimate,mean,lower,upper\n";
  for (const auto& [name, band] : bands) {
    for (Eigen::Index g = 0; g < band.grid.size(); ++g) {
      out << name << ',' << format_double(band.grid[g]) << ',' << format_double(band.estimate[g]) << ','
          << format_double(band.mean[g]) << ',' << format_double(band.lower[g]) << ','
          << format_double(band.upper[g]) << '\n';
    }
  }
}

}  // namespace mctm
