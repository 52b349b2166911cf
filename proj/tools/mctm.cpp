#include "mctm/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  mctm::RunConfig c;
  CLI::App app{"Multivariate conditional transformation models"};
  app.set_config("--config", "", "INI or TOML file with option values");
  app.require_subcommand(1);
  app.add_option("--out", c.out, "output directory")->capture_default_str();
  app.add_option("--seed", c.seed, "random seed")->capture_default_str();

  auto* fit = app.add_subcommand("fit", "fit a model to a CSV data set");
  fit->add_option("--data", c.data, "CSV file")->required();
  fit->add_option("--responses", c.responses, "response columns (default: all non-covariates)")->delimiter(',');
  fit->add_option("--covariates", c.covariates, "covariate columns")->delimiter(',');
  fit->add_option("--margins", c.margins, "unconditional | shift | varying | varying-bernstein")->capture_default_str();
  fit->add_option("--order-margin", c.order_margin, "Bernstein order of the margins")->capture_default_str();
  fit->add_option("--order-margin-covariate", c.order_margin_covariate, "Bernstein order in the covariate for varying-bernstein margins")
      ->capture_default_str();
  fit->add_option("--lambda-terms", c.lambda_terms, "constant | linear | bernstein")->capture_default_str();
  fit->add_option("--order-lambda", c.order_lambda, "Bernstein order of lambda(x)")->capture_default_str();
  fit->add_option("--lambda-covariates", c.lambda_covariates, "covariates entering lambda(x)")->delimiter(',');
  fit->add_option("--fix-zero", c.fix_zero, "fix lambda_jk = 0, as 'j,k' (repeatable)");
  fit->add_option("--reference", c.reference, "normal | logistic | mev")->capture_default_str();
  fit->add_option("--support-margin", c.support_margin, "widen response supports by this fraction of the range")
      ->capture_default_str();
  fit->add_option("--max-outer", c.max_outer, "outer optimizer iterations")->capture_default_str();
  fit->add_option("--grad-tol", c.grad_tol, "gradient tolerance")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "generate simulation data sets");
  sim->add_option("--design", c.design, "bivariate | trivariate | highdim")->capture_default_str();
  sim->add_option("--n", c.n, "observations per data set")->capture_default_str();
  sim->add_option("--R", c.R, "number of data sets")->capture_default_str();
  sim->add_option("--dim", c.dim, "responses for the highdim design")->capture_default_str();

  auto* boot = app.add_subcommand("bootstrap", "bootstrap bands for the dependence functionals");
  boot->add_option("--model", c.model, "model.json from fit")->required();
  boot->add_option("--data", c.data, "CSV with the covariate columns (refit method)");
  boot->add_option("--B", c.B, "replicates")->capture_default_str();
  boot->add_option("--method", c.method, "refit | asymptotic")->capture_default_str();
  boot->add_option("--grid", c.grid, "grid points")->capture_default_str();
  boot->add_option("--grid-covariate", c.grid_covariate, "covariate to vary (default: first)");
  boot->add_option("--level", c.level, "band level")->capture_default_str();
  boot->add_option("--max-outer", c.max_outer, "outer optimizer iterations per refit")->capture_default_str();

  auto* pred = app.add_subcommand("predict", "evaluate fitted distributions at query points");
  pred->add_option("--model", c.model, "model.json from fit")->required();
  pred->add_option("--query", c.query, "CSV of query points")->required();
  pred->add_option("--quantity", c.quantity,
                   "joint-cdf | joint-density | marginal-cdf | marginal-density | quantile | rho-S | tau-K | quantile-dependence")
      ->required();
  pred->add_option("--margin", c.margin, "response index for marginal quantities (1-based)")->capture_default_str();
  pred->add_option("--pair", c.pair, "response pair 'j,k' for dependence quantities")->capture_default_str();
  pred->add_option("--q", c.q, "quantile level for quantile dependence")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mctm::kExitInputError;
  }
  c.command = app.get_subcommands().front()->get_name();
  return mctm::run_command(c, std::cout, std::cerr);
}
