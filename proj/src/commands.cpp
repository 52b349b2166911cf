#include "mctm/commands.hpp"

#include "mctm/bootstrap.hpp"
#include "mctm/distribution.hpp"
#include "mctm/io.hpp"
#include "mctm/likelihood.hpp"
#include "mctm/model_io.hpp"
#include "mctm/simulation.hpp"
#include "mctm/stats.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <ostream>
#include <sstream>

namespace mctm {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string out_path(const RunConfig& config, const std::string& name) {
  fs::create_directories(config.out);
  return (fs::path(config.out) / name).string();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

std::pair<int, int> parse_pair(const std::string& text, int dim) {
  const auto parts = split_list(text);
  if (parts.size() != 2) throw InputError("expected a pair 'j,k', got '" + text + "'");
  int j = 0;
  int k = 0;
  try {
    j = std::stoi(parts[0]);
    k = std::stoi(parts[1]);
  } catch (const std::exception&) {
    throw InputError("expected integer indices in '" + text + "'");
  }
  if (j < 1 || k < 1 || j > dim || k > dim || j == k) {
    throw InputError("pair '" + text + "' must name two different responses in 1.." + std::to_string(dim));
  }
  return {j - 1, k - 1};
}

int covariate_index(const std::vector<std::string>& names, const std::string& name) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  throw InputError("'" + name + "' is not one of the covariates");
}

SpecOptions spec_options(const RunConfig& c, const Dataset& data) {
  SpecOptions o;
  o.reference = ReferenceDistribution::parse(c.reference);
  if (c.order_margin < 1 || c.order_lambda < 1 || c.order_margin_covariate < 1) {
    throw InputError("basis orders must be at least 1");
  }
  o.margin_order = c.order_margin;
  o.margin_terms = parse_margin_terms(c.margins);
  o.margin_covariate_order = c.order_margin_covariate;
  o.lambda_terms = parse_lambda_terms(c.lambda_terms);
  o.lambda_order = c.order_lambda;
  for (const auto& name : c.lambda_covariates) o.lambda_covariates.push_back(covariate_index(data.covariate_names, name));
  for (const auto& fz : c.fix_zero) {
    auto [j, k] = parse_pair(fz, data.dim());
    if (k > j) std::swap(j, k);
    o.fixed_zero.emplace_back(j, k);
  }
  o.support_margin = c.support_margin;
  return o;
}

// Covariate vector at the grid point g of column `col`, others at their means.
Vector grid_base(const ModelDocument& doc) { return doc.covariate_mean; }

std::string pair_name(const std::string& prefix, int j, int k) {
  return prefix + "_" + std::to_string(j + 1) + std::to_string(k + 1);
}

void print_summary(const ModelDocument& doc, std::ostream& log) {
  const FittedModel& m = doc.model;
  const ParamLayout layout(m.spec);
  log << "responses: ";
  for (std::size_t j = 0; j < doc.response_names.size(); ++j) log << (j ? ", " : "") << doc.response_names[j];
  log << "\nobservations: " << m.n_obs << ", parameters: " << layout.size() << "\n";
  log << "converged: " << (m.converged() ? "yes" : "no") << " (" << m.diagnostics.message << ")\n";
  log << "log-likelihood: " << std::setprecision(8) << m.full_loglik() << "\n";
  const bool have_se = m.vcov.size() > 0;
  const Vector se = have_se ? m.standard_errors() : Vector();
  if (layout.lambda_block_offset() < layout.size()) {
    log << "lambda coefficients:\n";
    for (int i = layout.lambda_block_offset(); i < layout.size(); ++i) {
      log << "  " << std::left << std::setw(16) << layout.label(i) << std::right << std::setw(12) << std::setprecision(5)
          << m.theta[i];
      if (have_se) log << "  (SE " << std::setprecision(4) << se[i] << ")";
      log << "\n";
    }
    const std::vector<double> x(doc.covariate_mean.data(), doc.covariate_mean.data() + doc.covariate_mean.size());
    log << "dependence" << (x.empty() ? "" : " at covariate means") << ":\n";
    for (int j = 1; j < m.spec.dim(); ++j) {
      for (int k = 0; k < j; ++k) {
        const DependenceMeasures d = dependence_measures(m, x, j, k);
        log << "  (" << j + 1 << "," << k + 1 << ") pearson " << std::setprecision(4) << d.pearson << ", spearman "
            << d.spearman << ", kendall " << d.kendall << "\n";
      }
    }
  }
  for (const auto& w : m.diagnostics.warnings) log << "warning: " << w << "\n";
}

void write_parameters(const std::string& path, const FittedModel& m) {
  const ParamLayout layout(m.spec);
  const bool have_se = m.vcov.size() > 0;
  const Vector se = have_se ? m.standard_errors() : Vector();
  std::ofstream out = open_out(path);
  out << "parameter,estimate,se,z\n";
  for (int i = 0; i < layout.size(); ++i) {
    out << layout.label(i) << ',' << format_double(m.theta[i]) << ',';
    if (have_se) {
      out << format_double(se[i]) << ',' << format_double(se[i] > 0.0 ? m.theta[i] / se[i] : NAN);
    } else {
      out << "NA,NA";
    }
    out << '\n';
  }
}

json write_pit(const std::string& path, const FittedModel& m, const Dataset& data) {
  const int j_dim = m.spec.dim();
  RowMatrix pit(data.n(), j_dim);
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < j_dim; ++j) pit(i, j) = marginal_cdf(m, j, data.Y(i, j), data.covariate_row(i));
  }
  write_csv_file(path, data.response_names, pit);
  json ks = json::array();
  for (int j = 0; j < j_dim; ++j) {
    std::vector<double> u;
    u.reserve(static_cast<std::size_t>(data.n()));
    for (int i = 0; i < data.n(); ++i) u.push_back(pit(i, j));
    const double d = ks_uniform_statistic(u);
    ks.push_back({{"response", data.response_names[static_cast<std::size_t>(j)]},
                  {"ks_statistic", d},
                  {"p_value", ks_pvalue(d, data.n())}});
  }
  return ks;
}

void write_diagnostics(const std::string& path, const FittedModel& m, const json& pit) {
  json progress = json::array();
  for (const auto& [s, e] : m.diagnostics.outer_progress) progress.push_back({s, e});
  const json j = {{"converged", m.converged()},
                  {"message", m.diagnostics.message},
                  {"loglik", m.loglik},
                  {"full_loglik", m.full_loglik()},
                  {"outer_iterations", m.diagnostics.outer_iterations},
                  {"inner_iterations", m.diagnostics.inner_iterations},
                  {"lagrangian_gradient", m.diagnostics.lagrangian_gradient},
                  {"max_violation", m.diagnostics.max_violation},
                  {"min_slack", m.diagnostics.min_slack},
                  {"active_constraints", m.diagnostics.active_constraints},
                  {"outer_progress", progress},
                  {"warnings", m.diagnostics.warnings},
                  {"pit", pit}};
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

// Grid over one covariate (others at their means) for bootstrap functionals.
struct Grid {
  Vector points;
  Vector base;
  int column = -1;
};

Grid make_grid(const ModelDocument& doc, const RunConfig& config) {
  Grid g;
  g.base = grid_base(doc);
  if (doc.covariate_names.empty()) {
    g.points = Vector::Zero(1);
    return g;
  }
  g.column = config.grid_covariate.empty() ? 0 : covariate_index(doc.covariate_names, config.grid_covariate);
  if (config.grid < 2) throw InputError("the grid needs at least 2 points");
  g.points = Vector::LinSpaced(config.grid, doc.covariate_min[g.column], doc.covariate_max[g.column]);
  return g;
}

Functional spearman_on_grid(int j, int k, const Grid& g) {
  if (g.column >= 0) return spearman_functional(j, k, g.base, g.column);
  return [=](const FittedModel& m, double) { return dependence_measures(m, {}, j, k).spearman; };
}

}  // namespace

int cmd_fit(const RunConfig& config, std::ostream& log) {
  if (config.data.empty()) throw InputError("fit needs --data");
  const CsvTable table = read_csv_file(config.data);
  std::vector<std::string> responses = config.responses;
  if (responses.empty()) {
    for (const auto& h : table.header) {
      if (std::find(config.covariates.begin(), config.covariates.end(), h) == config.covariates.end()) responses.push_back(h);
    }
  }
  const Dataset data = select_dataset(table, responses, config.covariates);
  ModelSpec spec = [&] {
    try {
      return build_spec(data, spec_options(config, data));
    } catch (const ConfigError& e) {
      throw InputError(e.what());
    }
  }();
  FitOptions options;
  options.max_outer_iterations = config.max_outer;
  options.gradient_tolerance = config.grad_tol;
  options.seed = config.seed;
  const FittedModel fitted = fit(spec, data, options);
  const ModelDocument doc = make_document(fitted, data);

  const json pit = write_pit(out_path(config, "pit.csv"), fitted, data);
  write_diagnostics(out_path(config, "diagnostics.json"), fitted, pit);
  print_summary(doc, log);
  if (!fitted.converged()) {
    log << "fit did not converge; see " << out_path(config, "diagnostics.json") << "\n";
    return kExitNonConvergence;
  }
  save_model(out_path(config, "model.json"), doc);
  write_parameters(out_path(config, "parameters.csv"), fitted);
  log << "wrote " << out_path(config, "model.json") << "\n";
  return kExitSuccess;
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
  SimDesign design;
  try {
    design.variant = parse_sim_variant(config.design);
    design.n = config.n;
    design.R = config.R;
    design.dim = config.dim;
    design.seed = config.seed;
    design.validate();
  } catch (const ConfigError& e) {
    throw InputError(e.what());
  }
  const Simulation sim = generate(design);
  for (int r = 0; r < design.R; ++r) {
    const Dataset& d = sim.datasets[static_cast<std::size_t>(r)];
    RowMatrix all(d.n(), d.dim() + 1);
    all.leftCols(d.dim()) = d.Y;
    all.col(d.dim()) = d.X.col(0);
    std::vector<std::string> header = d.response_names;
    header.push_back("x");
    char name[32];
    std::snprintf(name, sizeof name, "sim_%03d.csv", r + 1);
    write_csv_file(out_path(config, name), header, all);
  }

  const SimTruth& t = sim.truth;
  json truth = {{"design", to_string(design.variant)},
                {"dim", t.dim},
                {"n", design.n},
                {"R", design.R},
                {"seed", design.seed},
                {"x_range", {t.x_lo, t.x_hi}}};
  json margins = json::array();
  for (const auto& m : t.margins) margins.push_back({{"a", m.a}, {"b", m.b}, {"p", m.p}});
  truth["margins"] = margins;
  json forms = {{"lambda_21", "x^2"}};
  if (t.dim >= 3) {
    forms["lambda_31"] = "-x";
    forms["lambda_32"] = "x^3 - x";
  }
  forms["other"] = "0";
  forms["sigma"] = "Lambda(x)^{-1} Lambda(x)^{-T}";
  truth["forms"] = forms;
  // x = -0.9, -0.89, ..., 0.9
  std::vector<double> grid;
  for (int i = -90; i <= 90; ++i) grid.push_back(i / 100.0);
  truth["grid"] = grid;
  json lambda = json::object();
  json sigma = json::object();
  for (int j = 1; j < t.dim; ++j) {
    for (int k = 0; k < j; ++k) {
      std::vector<double> v;
      for (double x : grid) v.push_back(t.lambda(j, k, x));
      lambda[pair_name("lambda", j, k)] = v;
    }
  }
  for (int j = 0; j < t.dim; ++j) {
    for (int k = 0; k <= j; ++k) {
      std::vector<double> v;
      for (double x : grid) v.push_back(t.sigma(x).sigma(j, k));
      sigma[pair_name("sigma", j, k)] = v;
    }
  }
  truth["lambda"] = lambda;
  truth["sigma"] = sigma;
  std::ofstream out = open_out(out_path(config, "truth.json"));
  out << truth.dump(2) << "\n";
  log << "wrote " << design.R << " data sets and truth.json to " << config.out << "\n";
  return kExitSuccess;
}

int cmd_bootstrap(const RunConfig& config, std::ostream& log) {
  if (config.model.empty()) throw InputError("bootstrap needs --model");
  if (config.B < 1) throw InputError("--B must be at least 1");
  const ModelDocument doc = load_model(config.model);
  const FittedModel& m = doc.model;
  BootstrapResult result;
  if (config.method == "refit") {
    if (config.data.empty()) throw InputError("the refit bootstrap needs --data with the covariate columns");
    RowMatrix x(doc.data.rows, static_cast<Eigen::Index>(doc.covariate_names.size()));
    if (!doc.covariate_names.empty()) {
      const CsvTable table = read_csv_file(config.data);
      x.resize(table.values.rows(), static_cast<Eigen::Index>(doc.covariate_names.size()));
      for (std::size_t c = 0; c < doc.covariate_names.size(); ++c) {
        x.col(static_cast<Eigen::Index>(c)) = table.values.col(table.column(doc.covariate_names[c]));
      }
    }
    FitOptions options;
    options.max_outer_iterations = config.max_outer;
    options.gradient_tolerance = config.grad_tol;
    result = parametric_bootstrap(m, x, config.B, config.seed, options);
  } else if (config.method == "asymptotic") {
    result = asymptotic_draws(m, config.B, config.seed);
  } else {
    throw InputError("--method must be 'refit' or 'asymptotic'");
  }
  for (const auto& w : result.warnings) log << "warning: " << w << "\n";

  const Grid grid = make_grid(doc, config);
  std::vector<std::pair<std::string, BandCurve>> bands;
  for (int j = 1; j < m.spec.dim(); ++j) {
    for (int k = 0; k < j; ++k) {
      try {
        bands.emplace_back(pair_name("rhoS", j, k),
                           summarize(result, m.spec, spearman_on_grid(j, k, grid), grid.points, config.level));
      } catch (const ConfigError& e) {
        throw InputError(e.what());
      }
    }
  }
  {
    std::ofstream out = open_out(out_path(config, "bands.csv"));
    write_bands_csv(out, bands);
  }
  const ParamLayout layout(m.spec);
  std::ofstream reps = open_out(out_path(config, "replicates.csv"));
  reps << "replicate,converged";
  for (int i = 0; i < layout.size(); ++i) reps << ',' << layout.label(i);
  reps << '\n';
  for (std::size_t b = 0; b < result.replicates.size(); ++b) {
    reps << b + 1 << ',' << (result.converged[b] ? 1 : 0);
    for (Eigen::Index i = 0; i < result.replicates[b].size(); ++i) reps << ',' << format_double(result.replicates[b][i]);
    reps << '\n';
  }
  log << result.method << " bootstrap: " << result.usable() << " of " << config.B << " replicates usable";
  if (result.method == "asymptotic") log << ", " << result.rejected_draws << " draws rejected";
  log << "\nwrote " << out_path(config, "bands.csv") << "\n";
  return kExitSuccess;
}

int cmd_predict(const RunConfig& config, std::ostream& log) {
  if (config.model.empty()) throw InputError("predict needs --model");
  if (config.query.empty()) throw InputError("predict needs --query");
  const ModelDocument doc = load_model(config.model);
  const FittedModel& m = doc.model;
  const CsvTable table = read_csv_file(config.query);
  const int j_dim = m.spec.dim();
  const auto n = table.values.rows();

  std::vector<int> xcols;
  for (const auto& name : doc.covariate_names) xcols.push_back(table.column(name));
  const auto x_of = [&](Eigen::Index i) {
    std::vector<double> x;
    for (int c : xcols) x.push_back(table.values(i, c));
    return x;
  };
  if (config.margin < 1 || config.margin > j_dim) throw InputError("--margin must lie in 1.." + std::to_string(j_dim));
  const int jm = config.margin - 1;
  const std::string& qty = config.quantity;

  std::vector<std::string> header = table.header;
  std::vector<std::vector<double>> extra(static_cast<std::size_t>(n));
  std::vector<std::string> extra_names;
  if (qty == "joint-cdf" || qty == "joint-density") {
    std::vector<int> ycols;
    for (const auto& name : doc.response_names) ycols.push_back(table.column(name));
    extra_names = qty == "joint-cdf" ? std::vector<std::string>{"value", "error", "flag"}
                                     : std::vector<std::string>{"value", "flag"};
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector y(j_dim);
      for (int j = 0; j < j_dim; ++j) y[j] = table.values(i, ycols[static_cast<std::size_t>(j)]);
      if (qty == "joint-cdf") {
        const CdfResult r = joint_cdf(m, y, x_of(i));
        extra[static_cast<std::size_t>(i)] = {r.value, r.error, r.clamped ? 1.0 : 0.0};
      } else {
        const DensityResult r = joint_density(m, y, x_of(i));
        extra[static_cast<std::size_t>(i)] = {r.value, (r.clamped || !r.feasible) ? 1.0 : 0.0};
      }
    }
  } else if (qty == "marginal-cdf" || qty == "marginal-density") {
    const int ycol = table.column(doc.response_names[static_cast<std::size_t>(jm)]);
    extra_names = {"value", "flag"};
    const IndexPartition part = IndexPartition::of({jm}, j_dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector y = Vector::Constant(1, table.values(i, ycol));
      const MarginalResult r = marginal_distribution(m, part, y, x_of(i));
      if (qty == "marginal-cdf") {
        extra[static_cast<std::size_t>(i)] = {marginal_cdf(m, jm, y[0], x_of(i)), r.cdf.clamped ? 1.0 : 0.0};
      } else {
        extra[static_cast<std::size_t>(i)] = {r.density.value, (r.density.clamped || !r.density.feasible) ? 1.0 : 0.0};
      }
    }
  } else if (qty == "quantile") {
    const int pcol = table.column("p");
    extra_names = {"value", "flag"};
    for (Eigen::Index i = 0; i < n; ++i) {
      const Inversion inv = marginal_quantile(m, jm, x_of(i), table.values(i, pcol));
      extra[static_cast<std::size_t>(i)] = {inv.y, inv.clamped ? 1.0 : 0.0};
    }
  } else if (qty == "rho-S" || qty == "tau-K" || qty == "quantile-dependence") {
    const auto [j, k] = parse_pair(config.pair, j_dim);
    extra_names = qty == "quantile-dependence" ? std::vector<std::string>{"lower", "upper"}
                                               : std::vector<std::string>{"value"};
    for (Eigen::Index i = 0; i < n; ++i) {
      const DependenceMeasures d = dependence_measures(m, x_of(i), j, k, config.q);
      if (qty == "rho-S") extra[static_cast<std::size_t>(i)] = {d.spearman};
      if (qty == "tau-K") extra[static_cast<std::size_t>(i)] = {d.kendall};
      if (qty == "quantile-dependence") extra[static_cast<std::size_t>(i)] = {d.lower_quantile, d.upper_quantile};
    }
  } else {
    throw InputError("unknown --quantity '" + qty + "'");
  }

  header.insert(header.end(), extra_names.begin(), extra_names.end());
  RowMatrix values(n, static_cast<Eigen::Index>(header.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    values.row(i).head(table.values.cols()) = table.values.row(i);
    for (std::size_t e = 0; e < extra_names.size(); ++e) {
      values(i, table.values.cols() + static_cast<Eigen::Index>(e)) = extra[static_cast<std::size_t>(i)][e];
    }
  }
  write_csv_file(out_path(config, "predictions.csv"), header, values);
  log << "wrote " << n << " rows to " << out_path(config, "predictions.csv") << "\n";
  return kExitSuccess;
}

int run_command(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    if (config.command == "fit") return cmd_fit(config, log);
    if (config.command == "simulate") return cmd_simulate(config, log);
    if (config.command == "bootstrap") return cmd_bootstrap(config, log);
    if (config.command == "predict") return cmd_predict(config, log);
    err << "error: unknown command '" << config.command << "'\n";
    return kExitInputError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const fs::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace mctm
