#include "fixtures.hpp"
#include "mctm/model.hpp"
#include "mctm/simulation.hpp"

#include <doctest.h>

#include <random>

using namespace mctm;
using namespace mctm::testing;

namespace {

std::vector<ConditionalBasis> identity_margins(int dim) {
  return std::vector<ConditionalBasis>(static_cast<std::size_t>(dim), identity_margin());
}

}  // namespace

TEST_CASE("constant lambda assembles into the unit lower triangle") {
  const ModelSpec spec = ModelSpec::with_common_lambda(ReferenceDistribution(), identity_margins(2), CovariateBasis::intercept());
  Vector theta(5);
  theta << identity_theta(2), -0.7;
  const LambdaFactor L = assemble_lambda(spec, theta, std::vector<double>{});
  CHECK(L.matrix().isApprox((Matrix(2, 2) << 1, 0, -0.7, 1).finished()));
}

TEST_CASE("simulation designs evaluated through Bernstein lambda bases") {
  // x^2, -x and x^3 - x are polynomials, so Bernstein bases of order 3 on
  // [-1, 1] represent them exactly.
  const Support xs(-1.0, 1.0);
  const CovariateBasis b3 = CovariateBasis::bernstein(0, 3, xs);
  const ModelSpec spec = ModelSpec::with_common_lambda(ReferenceDistribution(), identity_margins(3), b3);
  const ParamLayout layout(spec);
  StructuredParams p = unpack(layout, Vector::Zero(layout.size()));
  for (int j = 0; j < 3; ++j) p.margins[static_cast<std::size_t>(j)] = identity_theta(1);
  p.lambda[0] = bernstein_interpolate([](double x) { return x * x; }, 3, -1, 1);
  p.lambda[1] = bernstein_interpolate([](double x) { return -x; }, 3, -1, 1);
  p.lambda[2] = bernstein_interpolate([](double x) { return x * x * x - x; }, 3, -1, 1);
  const Vector theta = pack(layout, p);
  const std::vector<double> x = {0.5};
  const LambdaFactor L = assemble_lambda(spec, theta, x);
  CHECK(L(1, 0) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(L(2, 0) == doctest::Approx(-0.5).epsilon(1e-13));
  CHECK(L(2, 1) == doctest::Approx(-0.375).epsilon(1e-13));
  CHECK(L(0, 1) == 0.0);
  CHECK(L(1, 1) == 1.0);
}

TEST_CASE("sigma from lambda") {
  SUBCASE("bivariate closed form") {
    for (double c : {-2.0, -0.3, 0.0, 1.7}) {
      const CopulaSummary s = sigma_from_lambda(LambdaFactor((Matrix(2, 2) << 1, 0, c, 1).finished()));
      CHECK(s.sigma.isApprox((Matrix(2, 2) << 1, -c, -c, 1 + c * c).finished(), 1e-14));
      CHECK(s.correlation(0, 0) == doctest::Approx(1.0));
      CHECK(s.variances[1] == doctest::Approx(1 + c * c));
    }
  }
  SUBCASE("trivariate closed form") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
      const double l21 = u(rng), l31 = u(rng), l32 = u(rng);
      Matrix m = Matrix::Identity(3, 3);
      m(1, 0) = l21;
      m(2, 0) = l31;
      m(2, 1) = l32;
      const CopulaSummary s = sigma_from_lambda(LambdaFactor(m));
      CHECK(std::abs(s.sigma(1, 2) - (-l21 * l21 * l32 + l21 * l31 - l32)) < 1e-12 * (1 + std::abs(s.sigma(1, 2))));
      const double s33 = (l21 * l32 - l31) * (l21 * l32 - l31) + l32 * l32 + 1;
      CHECK(std::abs(s.sigma(2, 2) - s33) < 1e-12 * s33);
    }
  }
  SUBCASE("identity") {
    const CopulaSummary s = sigma_from_lambda(LambdaFactor::identity(4));
    CHECK(s.sigma.isIdentity());
    CHECK(s.correlation.isIdentity());
  }
}

TEST_CASE("lambda to correlation") {
  CHECK(lambda_to_correlation(-1.633) == doctest::Approx(0.853).epsilon(1e-3));
  CHECK(lambda_to_correlation(0.0) == 0.0);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 10; ++i) {
    const double l = u(rng);
    const CopulaSummary s = sigma_from_lambda(LambdaFactor((Matrix(2, 2) << 1, 0, l, 1).finished()));
    CHECK(std::abs(lambda_to_correlation(l) - s.correlation(0, 1)) < 1e-12);
  }
}

TEST_CASE("random lambda factors up to J = 10") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int rep = 0; rep < 200; ++rep) {
    const int dim = 1 + rep % 10;
    Matrix m = Matrix::Identity(dim, dim);
    for (int j = 1; j < dim; ++j) {
      for (int k = 0; k < j; ++k) m(j, k) = u(rng);
    }
    const LambdaFactor L(m);
    const Matrix inv = L.inverse();
    CHECK((m * inv - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, inv.cwiseAbs().maxCoeff()));
    const CopulaSummary s = sigma_from_lambda(L);
    CHECK((s.sigma - s.sigma.transpose()).isZero(0.0));
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(s.sigma).eigenvalues().minCoeff() > 0.0);
    CHECK(s.correlation.diagonal().isApprox(Vector::Ones(dim)));
  }
  CHECK_THROWS_AS(LambdaFactor((Matrix(2, 2) << 1, 0.5, 0, 1).finished()), ConfigError);
}

TEST_CASE("fixed-zero entries stay zero") {
  const ModelSpec spec = ModelSpec::with_common_lambda(ReferenceDistribution(), identity_margins(3),
                                                       CovariateBasis::linear({0}), {{2, 0}});
  const ParamLayout layout(spec);
  CHECK(layout.lambda_offset(2, 0) == -1);
  CHECK(layout.size() == 6 + 2 * 2);
  std::mt19937_64 rng(24);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 10; ++rep) {
    Vector theta(layout.size());
    for (auto& v : theta) v = z(rng);
    CHECK(assemble_lambda(spec, theta, std::vector<double>{z(rng)})(2, 0) == 0.0);
  }
}

TEST_CASE("pack and unpack") {
  std::mt19937_64 rng(25);
  for (int i = 0; i < 10; ++i) {
    const Instance inst = random_instance(rng, 5, i);
    const ParamLayout layout(inst.spec);
    CHECK(pack(layout, unpack(layout, inst.theta)) == inst.theta);
  }
  SUBCASE("univariate model has no lambda block") {
    const ModelSpec spec(ReferenceDistribution(), {identity_margin()}, {});
    const ParamLayout layout(spec);
    CHECK(layout.size() == 2);
    CHECK(layout.lambda_block_offset() == 2);
    CHECK(unpack(layout, identity_theta(1)).lambda.empty());
  }
  SUBCASE("length mismatch") {
    const ModelSpec spec(ReferenceDistribution(), {identity_margin()}, {});
    CHECK_THROWS_AS(unpack(ParamLayout(spec), Vector::Zero(3)), ConfigError);
  }
  SUBCASE("lambda offsets address the lambda entries") {
    const ModelSpec spec = ModelSpec::with_common_lambda(ReferenceDistribution(), identity_margins(3),
                                                         CovariateBasis::intercept());
    const ParamLayout layout(spec);
    Vector theta = Vector::Zero(layout.size());
    theta[layout.lambda_offset(2, 1)] = 3.0;
    const LambdaFactor L = assemble_lambda(spec, theta, std::vector<double>{});
    CHECK(L(2, 1) == 3.0);
    CHECK(L(1, 0) == 0.0);
    CHECK(layout.label(layout.lambda_offset(2, 1)) == "lambda32[0]");
  }
}

TEST_CASE("reference distributions") {
  for (const char* name : {"normal", "logistic", "mev"}) {
    const ReferenceDistribution r = ReferenceDistribution::parse(name);
    for (double p : {1e-10, 0.01, 0.3, 0.5, 0.9, 1 - 1e-9}) CHECK(r.cdf(r.quantile(p)) == doctest::Approx(p).epsilon(1e-9));
    for (double z : {-3.0, -0.5, 0.0, 1.0, 2.5}) {
      const double h = 1e-6;
      CHECK(r.density(z) == doctest::Approx((r.cdf(z + h) - r.cdf(z - h)) / (2 * h)).epsilon(1e-6));
      CHECK(r.log_density(z) == doctest::Approx(std::log(r.density(z))).epsilon(1e-12));
      CHECK(r.survival(z) == doctest::Approx(1.0 - r.cdf(z)).epsilon(1e-12));
    }
    // Log-concave: second differences of the log density are non-positive.
    for (double z = -6.0; z <= 6.0; z += 0.25) {
      CHECK(r.log_density(z + 0.01) - 2 * r.log_density(z) + r.log_density(z - 0.01) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(ReferenceDistribution::parse("cauchy"), ConfigError);
}
