#include "fixtures.hpp"
#include "mctm/normal.hpp"
#include "mctm/simulation.hpp"
#include "mctm/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mctm;
using namespace mctm::testing;

TEST_CASE("Dagum distribution") {
  const DagumParams one{1, 1, 1};
  CHECK(dagum_cdf(one, 1.0) == doctest::Approx(0.5));
  CHECK(dagum_quantile(one, 0.5) == doctest::Approx(1.0));
  const DagumParams p{3.0, 2.0, 0.7};
  CHECK(dagum_cdf(p, 2.0) == doctest::Approx(std::pow(2.0, -0.7)));

  const auto& triples = simulation_dagum_params();
  CHECK(triples[0].a == doctest::Approx(std::exp(2.0)));
  CHECK(triples[1].b == doctest::Approx(1.0));
  CHECK(triples[2].b == doctest::Approx(std::exp(-0.9)));
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (const auto& t : triples) {
    for (int i = 0; i < 100; ++i) {
      const double y = dagum_quantile(t, u(rng));
      CHECK(dagum_quantile(t, dagum_cdf(t, y)) == doctest::Approx(y).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(dagum_cdf(DagumParams{0, 1, 1}, 1.0), ConfigError);
  CHECK_THROWS_AS(dagum_quantile(one, 1.5), ConfigError);
  CHECK_THROWS_AS(dagum_cdf(one, -1.0), ConfigError);
}

TEST_CASE("truth records") {
  SimDesign d;
  d.variant = SimVariant::Trivariate;
  const SimTruth t = simulation_truth(d);
  CHECK(t.lambda(1, 0, 0.5) == doctest::Approx(0.25));
  CHECK(t.lambda(2, 0, 0.5) == doctest::Approx(-0.5));
  CHECK(t.lambda(2, 1, 0.5) == doctest::Approx(-0.375));
  CHECK(t.lambda_factor(0.0).matrix().isIdentity());
  d.variant = SimVariant::HighDim;
  d.dim = 10;
  const SimTruth h = simulation_truth(d);
  CHECK(h.dim == 10);
  for (int j = 3; j < 10; ++j) {
    for (int k = 0; k < j; ++k) CHECK(h.lambda(j, k, 0.7) == 0.0);
  }
  // margins cycle through the three triples
  CHECK(h.margins[4].a == simulation_dagum_params()[1].a);
  CHECK(h.margins[9].p == simulation_dagum_params()[0].p);
}

TEST_CASE("bivariate latent covariance at fixed x") {
  SimDesign d;
  const SimTruth t = simulation_truth(d);
  const double x = 0.6;
  const int n = 1000000;
  CounterRng rng(5, 0);
  const double s2 = std::sqrt(1 + std::pow(x, 4));
  Matrix prod(n, 3);
  for (int i = 0; i < n; ++i) {
    const Vector y = draw_responses(t, x, rng);
    const double z1 = std_normal_quantile(dagum_cdf(t.margins[0], y[0]));
    const double z2 = s2 * std_normal_quantile(dagum_cdf(t.margins[1], y[1]));
    prod.row(i) << z1 * z1, z1 * z2, z2 * z2;
  }
  const Vector expected = (Vector(3) << 1.0, -x * x, 1 + std::pow(x, 4)).finished();
  for (int c = 0; c < 3; ++c) {
    const double mean = prod.col(c).mean();
    const double se = std::sqrt((prod.col(c).array() - mean).square().sum() / (n - 1) / n);
    CHECK(std::abs(mean - expected[c]) < 3 * se);
  }
}

TEST_CASE("trivariate components are independent at x = 0") {
  SimDesign d;
  d.variant = SimVariant::Trivariate;
  const SimTruth t = simulation_truth(d);
  const int n = 1000000;
  CounterRng rng(6, 0);
  RowMatrix Y(n, 3);
  for (int i = 0; i < n; ++i) Y.row(i) = draw_responses(t, 0.0, rng).transpose();
  CHECK(std::abs(pearson(Y.col(0), Y.col(1))) < 0.01);
  CHECK(std::abs(pearson(Y.col(0), Y.col(2))) < 0.01);
  CHECK(std::abs(pearson(Y.col(1), Y.col(2))) < 0.01);
}

TEST_CASE("the first margin does not depend on x") {
  SimDesign d;
  d.n = 20000;
  const Dataset data = generate_replicate(d, 0);
  const DagumParams m = simulation_truth(d).margins[0];
  std::vector<double> all, left, right;
  for (int i = 0; i < data.n(); ++i) {
    const double u = dagum_cdf(m, data.Y(i, 0));
    all.push_back(u);
    (data.X(i, 0) < 0 ? left : right).push_back(u);
  }
  CHECK(ks_uniform_statistic(all) < 1.63 / std::sqrt(all.size()));
  CHECK(ks_uniform_statistic(left) < 1.63 / std::sqrt(left.size()));
  CHECK(ks_uniform_statistic(right) < 1.63 / std::sqrt(right.size()));
  CHECK(data.X.minCoeff() >= -0.9);
  CHECK(data.X.maxCoeff() <= 0.9);
}

TEST_CASE("generation is deterministic per replicate") {
  SimDesign d;
  d.n = 50;
  d.R = 3;
  const Simulation a = generate(d);
  const Simulation b = generate(d);
  CHECK(a.datasets[2].Y == b.datasets[2].Y);
  CHECK_FALSE(a.datasets[0].Y == a.datasets[1].Y);
  CHECK(a.datasets[1].Y == generate_replicate(d, 1).Y);
  CHECK(a.datasets[0].response_names == std::vector<std::string>{"y1", "y2"});
  d.seed = 2;
  CHECK_FALSE(generate_replicate(d, 0).Y == a.datasets[0].Y);
}

TEST_CASE("design validation") {
  SimDesign d;
  d.n = 1;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d.n = 10;
  d.R = 0;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d.R = 1;
  d.variant = SimVariant::HighDim;
  d.dim = 7;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  CHECK(parse_sim_variant("trivariate") == SimVariant::Trivariate);
  CHECK_THROWS_AS(parse_sim_variant("quadvariate"), ConfigError);
}

TEST_CASE("RMSE over the grid") {
  const auto f = [](double x) { return std::sin(3 * x); };
  CHECK(rmse_curve(f, f) == 0.0);
  CHECK(rmse_curve(f, [&](double x) { return f(x) + 0.3; }) == doctest::Approx(0.3).epsilon(1e-14));
  const auto g = [](double x) { return x * x * x; };
  double acc = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = -0.9 + 1.8 * i / 99;
    acc += (f(x) - g(x)) * (f(x) - g(x));
  }
  CHECK(std::abs(rmse_curve(f, g) - std::sqrt(acc / 100)) < 1e-12);
}
