#ifndef MCTM_COMMANDS_HPP
#define MCTM_COMMANDS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mctm {

enum ExitCode : int { kExitSuccess = 0, kExitFailure = 1, kExitNonConvergence = 2, kExitInputError = 3 };

/// Settings of one command-line invocation. Response indices are 1-based here.
struct RunConfig {
  std::string command;
  std::string out = ".";
  std::uint64_t seed = 1;

  // fit
  std::string data;
  std::vector<std::string> responses;   // default: every column not listed as a covariate
  std::vector<std::string> covariates;
  std::string margins = "unconditional";  // unconditional | shift | varying | varying-bernstein
  int order_margin = 6;
  int order_margin_covariate = 3;
  std::string lambda_terms = "constant";  // constant | linear | bernstein
  int order_lambda = 6;
  std::vector<std::string> lambda_covariates;
  std::vector<std::string> fix_zero;      // "j,k", 1-based, k < j
  std::string reference = "normal";
  double support_margin = 0.0;
  int max_outer = 100;
  double grad_tol = 1e-6;

  // simulate
  std::string design = "bivariate";
  int n = 1000;
  int R = 100;
  int dim = 5;

  // bootstrap
  std::string model;
  int B = 100;
  std::string method = "refit";  // refit | asymptotic
  int grid = 50;
  std::string grid_covariate;    // default: first covariate
  double level = 0.95;

  // predict
  std::string query;
  std::string quantity;  // joint-cdf | joint-density | marginal-cdf | marginal-density | quantile | rho-S | tau-K | quantile-dependence
  int margin = 1;
  std::string pair = "1,2";
  double q = 0.05;
};

int cmd_fit(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_bootstrap(const RunConfig& config, std::ostream& log);
int cmd_predict(const RunConfig& config, std::ostream& log);

/// Dispatches on config.command and maps exceptions to exit codes.
int run_command(const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace mctm

#endif
