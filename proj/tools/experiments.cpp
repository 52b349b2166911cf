// Simulation studies at full scale: lambda-curve recovery per design and
// bootstrap band coverage of Spearman's rho.

#include "mctm/bootstrap.hpp"
#include "mctm/distribution.hpp"
#include "mctm/estimation.hpp"
#include "mctm/io.hpp"
#include "mctm/simulation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

using namespace mctm;

namespace {

double lambda_hat(const FittedModel& f, int j, int k, double x) {
  return assemble_lambda(f.spec, f.theta, std::vector<double>{x})(j, k);
}

std::string entry_name(int j, int k, int dim) {
  const std::string sep = dim > 9 ? "_" : "";
  return "lambda_" + std::to_string(j + 1) + sep + std::to_string(k + 1);
}

double quantile_of(std::vector<double> v, double p) { return sample_quantile(std::move(v), p); }

int run_recovery(const SimDesign& design, int margin_order, int lambda_order, bool varying, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const SimTruth truth = simulation_truth(design);
  const Vector grid = Vector::LinSpaced(100, truth.x_lo, truth.x_hi);
  std::ofstream rmse_out(fs::path(out_dir) / "rmse.csv");
  std::ofstream curve_out(fs::path(out_dir) / "curves.csv");
  rmse_out << "replicate,converged,entry,rmse,max_abs\n";
  curve_out << "replicate,entry,x,truth,estimate\n";
  std::vector<std::vector<double>> by_entry(static_cast<std::size_t>(truth.dim * truth.dim));
  for (int r = 0; r < design.R; ++r) {
    const Dataset data = generate_replicate(design, r);
    const FittedModel f = fit(simulation_model_spec(data, margin_order, lambda_order, varying), data);
    for (int j = 1; j < truth.dim; ++j) {
      for (int k = 0; k < j; ++k) {
        const std::string entry = entry_name(j, k, truth.dim);
        double max_abs = 0.0;
        for (Eigen::Index g = 0; g < grid.size(); ++g) {
          const double est = lambda_hat(f, j, k, grid[g]);
          max_abs = std::max(max_abs, std::abs(est));
          curve_out << r + 1 << ',' << entry << ',' << format_double(grid[g]) << ','
                    << format_double(truth.lambda(j, k, grid[g])) << ',' << format_double(est) << '\n';
        }
        const double rm = rmse_curve([&](double x) { return truth.lambda(j, k, x); },
                                     [&](double x) { return lambda_hat(f, j, k, x); }, truth.x_lo, truth.x_hi);
        by_entry[static_cast<std::size_t>(j * truth.dim + k)].push_back(rm);
        rmse_out << r + 1 << ',' << (f.converged() ? 1 : 0) << ',' << entry << ',' << format_double(rm) << ','
                 << format_double(max_abs) << '\n';
      }
    }
    std::cerr << "replicate " << r + 1 << "/" << design.R << (f.converged() ? "" : " (not converged)") << '\n';
  }
  std::cout << "entry,median_rmse,q90_rmse\n";
  for (int j = 1; j < truth.dim; ++j) {
    for (int k = 0; k < j; ++k) {
      const auto& v = by_entry[static_cast<std::size_t>(j * truth.dim + k)];
      std::cout << entry_name(j, k, truth.dim) << ',' << quantile_of(v, 0.5) << ',' << quantile_of(v, 0.9) << '\n';
    }
  }
  return 0;
}

// True Spearman's rho of the bivariate design: R(x) = -x^2 / sqrt(1 + x^4).
double true_spearman(double x) {
  const double r = -x * x / std::sqrt(1.0 + std::pow(x, 4));
  return 6.0 / std::numbers::pi * std::asin(r / 2.0);
}

int run_coverage(int R, int B, int n, int grid_size, double level, double threshold, const std::string& method) {
  SimDesign design;
  design.n = n;
  design.R = R;
  const Vector grid = Vector::LinSpaced(grid_size, -0.9, 0.9);
  const Functional rho = spearman_functional(1, 0, Vector::Zero(1), 0);
  double total = 0.0;
  int used = 0;
  for (int r = 0; r < R; ++r) {
    const Dataset data = generate_replicate(design, r);
    const FittedModel f = fit(simulation_model_spec(data, 6, 3), data);
    if (!f.converged()) {
      std::cerr << "replicate " << r + 1 << ": fit did not converge, skipped\n";
      continue;
    }
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(r);
    const BootstrapResult boot =
        method == "asymptotic" ? asymptotic_draws(f, B, seed) : parametric_bootstrap(f, data.X, B, seed);
    const BandCurve band = summarize(boot, f.spec, rho, grid, level);
    int inside = 0;
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
      const double t = true_spearman(grid[g]);
      if (band.lower[g] <= t && t <= band.upper[g]) ++inside;
    }
    const double share = static_cast<double>(inside) / static_cast<double>(grid.size());
    total += share;
    ++used;
    std::cout << "replicate " << r + 1 << " coverage " << share << '\n';
  }
  const double mean = used > 0 ? total / used : 0.0;
  std::cout << "mean pointwise coverage " << mean << " over " << used << " replicates (threshold " << threshold << ")\n";
  return mean >= threshold ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mctm simulation studies"};
  app.require_subcommand(1);

  auto* rec = app.add_subcommand("recovery", "fit R replicates and write lambda-curve RMSEs");
  std::string design_name = "bivariate";
  SimDesign design;
  int margin_order = 6;
  int lambda_order = 3;
  bool varying = false;
  std::string out = "recovery";
  rec->add_option("--design", design_name, "bivariate | trivariate | highdim");
  rec->add_option("--dim", design.dim, "highdim response count (5 or 10)");
  rec->add_option("--R", design.R, "replicates");
  rec->add_option("--n", design.n, "observations per replicate");
  rec->add_option("--seed", design.seed);
  rec->add_option("--order-margin", margin_order);
  rec->add_option("--order-lambda", lambda_order);
  rec->add_flag("--varying-margins", varying, "margin coefficients vary with x (order-3 Bernstein)");
  rec->add_option("--out", out);

  auto* cov = app.add_subcommand("coverage", "pointwise coverage of bootstrap bands for Spearman's rho");
  int cR = 20, cB = 50, cn = 1000, cgrid = 50;
  double level = 0.95, threshold = 0.8;
  std::string method = "refit";
  cov->add_option("--R", cR);
  cov->add_option("--B", cB);
  cov->add_option("--n", cn);
  cov->add_option("--grid", cgrid);
  cov->add_option("--level", level);
  cov->add_option("--threshold", threshold, "exit 1 when mean coverage is below this");
  cov->add_option("--method", method)->check(CLI::IsMember({"refit", "asymptotic"}));

  CLI11_PARSE(app, argc, argv);
  try {
    if (*rec) {
      design.variant = parse_sim_variant(design_name);
      design.validate();
      return run_recovery(design, margin_order, lambda_order, varying, out);
    }
    return run_coverage(cR, cB, cn, cgrid, level, threshold, method);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
