#include "fixtures.hpp"
#include "mctm/bootstrap.hpp"
#include "mctm/io.hpp"
#include "mctm/simulation.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace mctm;
using namespace mctm::testing;

namespace {

const FittedModel& cars_fit() {
  static const FittedModel f = [] {
    const CsvTable t = read_csv_file(std::string(MCTM_DATA_DIR) + "/cars.csv");
    const Dataset d = select_dataset(t, {"speed", "dist"}, {});
    return fit(build_spec(d, SpecOptions{}), d);
  }();
  return f;
}

// Gaussian data with order-3 margins: an interior estimate with no active constraints.
const FittedModel& interior_fit() {
  static const FittedModel f = [] {
    std::mt19937_64 rng(81);
    std::normal_distribution<double> z;
    RowMatrix Y(2000, 2);
    for (int i = 0; i < 2000; ++i) {
      Y(i, 0) = z(rng);
      Y(i, 1) = 0.5 * Y(i, 0) + z(rng);
    }
    const Dataset d(Y, RowMatrix(2000, 0));
    SpecOptions o;
    o.margin_order = 3;
    return fit(build_spec(d, o), d);
  }();
  return f;
}

BootstrapResult normal_draws(int B, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  BootstrapResult r;
  r.method = "test";
  // One-margin layout; the second coefficient keeps the transform increasing.
  r.estimate = Vector::Constant(2, 10.0);
  r.estimate[0] = 0.0;
  for (int b = 0; b < B; ++b) {
    r.replicates.push_back((Vector(2) << z(rng), 10.0).finished());
    r.converged.push_back(true);
  }
  return r;
}

const ModelSpec& dummy_spec() {
  static const ModelSpec s(ReferenceDistribution(), {identity_margin()}, {});
  return s;
}

}  // namespace

TEST_CASE("parametric bootstrap on cars") {
  const FittedModel& f = cars_fit();
  REQUIRE(f.converged());
  const int p = ParamLayout(f.spec).lambda_offset(1, 0);

  SUBCASE("same seed, same replicate") {
    const BootstrapResult a = parametric_bootstrap(f, RowMatrix(50, 0), 1, 5);
    const BootstrapResult b = parametric_bootstrap(f, RowMatrix(50, 0), 1, 5);
    CHECK(a.replicates[0] == b.replicates[0]);
  }
  SUBCASE("bootstrap standard error is close to the asymptotic one") {
    const BootstrapResult r = parametric_bootstrap(f, RowMatrix(50, 0), 100, 6);
    CHECK(r.usable() >= 90);
    std::vector<double> lam;
    for (std::size_t b = 0; b < r.replicates.size(); ++b) {
      if (r.converged[b]) lam.push_back(r.replicates[b][p]);
    }
    double mean = 0.0;
    for (double v : lam) mean += v;
    mean /= static_cast<double>(lam.size());
    double var = 0.0;
    for (double v : lam) var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / static_cast<double>(lam.size() - 1));
    const double asy = f.standard_errors()[p];
    CHECK(se / asy < 1.5);
    CHECK(asy / se < 1.5);

    const ParamLayout layout(f.spec);
    const Matrix& a = layout.constraint_matrix();
    for (std::size_t b = 0; b < r.replicates.size(); ++b) {
      if (r.converged[b]) CHECK((a * r.replicates[b]).minCoeff() > 0.0);
    }

    const Functional lam_f = [p](const FittedModel& m, double) { return m.theta[p]; };
    const Vector grid = Vector::Zero(1);
    const BandCurve c95 = summarize(r, f.spec, lam_f, grid, 0.95);
    const BandCurve c90 = summarize(r, f.spec, lam_f, grid, 0.90);
    CHECK(c90.lower[0] >= c95.lower[0]);
    CHECK(c90.upper[0] <= c95.upper[0]);
    CHECK(c95.estimate[0] == f.theta[p]);
    const BandCurve again = summarize(parametric_bootstrap(f, RowMatrix(50, 0), 100, 6), f.spec, lam_f, grid, 0.95);
    CHECK(again.lower == c95.lower);
    CHECK(again.upper == c95.upper);
  }
  SUBCASE("unconverged input is rejected") {
    FittedModel bad = f;
    bad.diagnostics.converged = false;
    CHECK_THROWS_AS(parametric_bootstrap(bad, RowMatrix(50, 0), 2, 1), ConfigError);
  }
}

TEST_CASE("asymptotic draws") {
  const FittedModel& f = interior_fit();
  REQUIRE(f.converged());
  REQUIRE(f.diagnostics.active_constraints.empty());
  const int B = 10000;
  const BootstrapResult r = asymptotic_draws(f, B, 3);
  CHECK(r.usable() == B);
  CHECK(r.rejected_draws == 0);
  Vector mean = Vector::Zero(f.theta.size());
  for (const auto& v : r.replicates) mean += v;
  mean /= B;
  const double scale = std::sqrt(f.vcov.norm());
  CHECK((mean - f.theta).norm() < 3 * scale / std::sqrt(B));
  Matrix cov = Matrix::Zero(f.theta.size(), f.theta.size());
  for (const auto& v : r.replicates) cov += (v - mean) * (v - mean).transpose();
  cov /= B - 1;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < cov.cols(); ++j) {
      CHECK(std::abs(cov(i, j) - f.vcov(i, j)) < 0.1 * std::sqrt(f.vcov(i, i) * f.vcov(j, j)));
    }
  }
  CHECK(asymptotic_draws(f, 5, 3).replicates[4] == r.replicates[4]);

  SUBCASE("active constraints are held at the estimate") {
    const FittedModel& c = cars_fit();
    const ParamLayout layout(c.spec);
    const Matrix& a = layout.constraint_matrix();
    const BootstrapResult d = asymptotic_draws(c, 200, 4);
    for (Eigen::Index row = 0; row < a.rows(); ++row) {
      if (a.row(row).dot(c.theta) > 1e-6) continue;
      for (std::size_t b = 0; b < d.replicates.size(); ++b) {
        CHECK(std::abs(a.row(row).dot(d.replicates[b]) - a.row(row).dot(c.theta)) < 1e-9);
      }
    }
    for (std::size_t b = 0; b < d.replicates.size(); ++b) {
      if (d.converged[b]) CHECK((a * d.replicates[b]).minCoeff() > 0.0);
    }
  }
}

TEST_CASE("percentile summaries") {
  SUBCASE("constant functional has zero width") {
    const BandCurve c = summarize(normal_draws(50, 1), dummy_spec(), [](const FittedModel&, double) { return 2.5; },
                                  Vector::LinSpaced(3, 0, 1));
    CHECK(c.lower == c.upper);
    CHECK(c.lower[1] == 2.5);
  }
  SUBCASE("normal draws reproduce normal quantiles") {
    const BandCurve c = summarize(normal_draws(20000, 2), dummy_spec(),
                                  [](const FittedModel& m, double) { return m.theta[0]; }, Vector::Zero(1));
    CHECK(std::abs(c.lower[0] + 1.959964) < 0.05);
    CHECK(std::abs(c.upper[0] - 1.959964) < 0.05);
  }
  SUBCASE("monotone maps of the functional") {
    const BootstrapResult r = normal_draws(99, 3);
    const Functional id = [](const FittedModel& m, double) { return m.theta[0]; };
    const Functional neg = [](const FittedModel& m, double) { return -m.theta[0]; };
    const Functional ex = [](const FittedModel& m, double) { return std::exp(m.theta[0]); };
    const BandCurve a = summarize(r, dummy_spec(), id, Vector::Zero(1));
    const BandCurve b = summarize(r, dummy_spec(), neg, Vector::Zero(1));
    const BandCurve e = summarize(r, dummy_spec(), ex, Vector::Zero(1));
    CHECK(b.lower[0] == doctest::Approx(-a.upper[0]).epsilon(1e-14));
    CHECK(b.upper[0] == doctest::Approx(-a.lower[0]).epsilon(1e-14));
    CHECK(e.lower[0] < e.upper[0]);
    // The same order statistics bracket both intervals.
    std::vector<double> v;
    for (const auto& t : r.replicates) v.push_back(t[0]);
    std::sort(v.begin(), v.end());
    const auto k = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), a.lower[0]) - v.begin());
    CHECK(e.lower[0] >= std::exp(v[k - 1]));
    CHECK(e.lower[0] <= std::exp(v[k]));
  }
  SUBCASE("too few replicates") {
    CHECK_THROWS_AS(summarize(normal_draws(19, 4), dummy_spec(), [](const FittedModel&, double) { return 0.0; },
                              Vector::Zero(1)),
                    ConfigError);
  }
  SUBCASE("type 7 quantiles") {
    CHECK(sample_quantile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
    CHECK(sample_quantile({1, 2, 3, 4, 5}, 0.9) == doctest::Approx(4.6));
    CHECK(sample_quantile({7}, 0.3) == 7);
  }
  SUBCASE("bands CSV") {
    BandCurve c;
    c.grid = Vector::LinSpaced(2, 0, 1);
    c.estimate = c.mean = c.lower = c.upper = Vector::Constant(2, 0.25);
    std::ostringstream out;
    write_bands_csv(out, {{"rhoS_21", c}});
    CHECK(out.str() == "functional,grid,estimate,mean,lower,upper\nrhoS_21,0,0.25,0.25,0.25,0.25\nrhoS_21,1,0.25,0.25,0.25,0.25\n");
  }
}
