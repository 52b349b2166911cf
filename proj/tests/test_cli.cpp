#include "mctm/commands.hpp"
#include "mctm/io.hpp"
#include "mctm/model_io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mctm;
namespace fs = std::filesystem;

namespace {

std::string cars_path() { return std::string(MCTM_DATA_DIR) + "/cars.csv"; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mctm_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int line_count(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(RunConfig c, std::string* log = nullptr, std::string* err = nullptr) {
  std::ostringstream l, e;
  const int code = run_command(c, l, e);
  if (log) *log = l.str();
  if (err) *err = e.str();
  return code;
}

RunConfig cars_fit(const fs::path& out) {
  RunConfig c;
  c.command = "fit";
  c.data = cars_path();
  c.out = out.string();
  return c;
}

}  // namespace

TEST_CASE("fit command on cars") {
  const fs::path dir = scratch("fit");
  std::string log;
  REQUIRE(run(cars_fit(dir), &log) == kExitSuccess);
  CHECK(log.find("-1.633") != std::string::npos);
  CHECK(log.find("SE 0.273") != std::string::npos);
  for (const char* f : {"model.json", "parameters.csv", "diagnostics.json", "pit.csv"}) CHECK(fs::exists(dir / f));
  CHECK(line_count(dir / "parameters.csv") == 1 + 15);
  CHECK(slurp(dir / "parameters.csv").find("lambda21[0],-1.633") != std::string::npos);

  SUBCASE("predict reproduces PIT values at the training rows") {
    RunConfig p;
    p.command = "predict";
    p.model = (dir / "model.json").string();
    p.query = cars_path();
    p.quantity = "marginal-cdf";
    p.margin = 2;
    p.out = (dir / "pred").string();
    REQUIRE(run(p) == kExitSuccess);
    const CsvTable pred = read_csv_file((dir / "pred" / "predictions.csv").string());
    const CsvTable pit = read_csv_file((dir / "pit.csv").string());
    for (Eigen::Index i = 0; i < pit.values.rows(); ++i) CHECK(pred.values(i, pred.column("value")) == pit.values(i, 1));
  }
  SUBCASE("quantile and CDF predictions are inverse") {
    std::ofstream((dir / "q.csv").string()) << "p\n0.05\n0.3\n0.5\n0.91\n";
    RunConfig p;
    p.command = "predict";
    p.model = (dir / "model.json").string();
    p.query = (dir / "q.csv").string();
    p.quantity = "quantile";
    p.out = (dir / "q").string();
    REQUIRE(run(p) == kExitSuccess);
    const CsvTable q = read_csv_file((dir / "q" / "predictions.csv").string());
    std::ofstream back((dir / "y.csv").string());
    back << "speed\n";
    for (Eigen::Index i = 0; i < q.values.rows(); ++i) back << format_double(q.values(i, 1)) << "\n";
    back.close();
    p.query = (dir / "y.csv").string();
    p.quantity = "marginal-cdf";
    REQUIRE(run(p) == kExitSuccess);
    const CsvTable c = read_csv_file((dir / "q" / "predictions.csv").string());
    for (Eigen::Index i = 0; i < q.values.rows(); ++i) CHECK(std::abs(c.values(i, 1) - q.values(i, 0)) < 1e-6);
  }
  SUBCASE("rank correlation prediction") {
    std::ofstream((dir / "none.csv").string()) << "id\n1\n";
    RunConfig p;
    p.command = "predict";
    p.model = (dir / "model.json").string();
    p.query = (dir / "none.csv").string();
    p.quantity = "rho-S";
    p.out = (dir / "r").string();
    REQUIRE(run(p) == kExitSuccess);
    const CsvTable r = read_csv_file((dir / "r" / "predictions.csv").string());
    CHECK(r.values(0, 1) == doctest::Approx(0.8415).epsilon(5e-4));
  }
  SUBCASE("predictions from a reloaded model are byte-identical") {
    RunConfig p;
    p.command = "predict";
    p.model = (dir / "model.json").string();
    p.query = cars_path();
    p.quantity = "joint-density";
    p.out = (dir / "a").string();
    REQUIRE(run(p) == kExitSuccess);
    save_model((dir / "copy.json").string(), load_model((dir / "model.json").string()));
    p.model = (dir / "copy.json").string();
    p.out = (dir / "b").string();
    REQUIRE(run(p) == kExitSuccess);
    CHECK(slurp(dir / "a" / "predictions.csv") == slurp(dir / "b" / "predictions.csv"));
  }
  SUBCASE("asymptotic bootstrap needs only the model") {
    RunConfig b;
    b.command = "bootstrap";
    b.model = (dir / "model.json").string();
    b.method = "asymptotic";
    b.B = 50;
    b.out = (dir / "boot1").string();
    REQUIRE(run(b) == kExitSuccess);
    b.out = (dir / "boot2").string();
    REQUIRE(run(b) == kExitSuccess);
    CHECK(slurp(dir / "boot1" / "bands.csv") == slurp(dir / "boot2" / "bands.csv"));
    CHECK(slurp(dir / "boot1" / "replicates.csv") == slurp(dir / "boot2" / "replicates.csv"));
    b.method = "refit";
    CHECK(run(b) == kExitInputError);
  }
}

TEST_CASE("fit command variants and errors") {
  const fs::path dir = scratch("fit_err");
  SUBCASE("single response") {
    RunConfig c = cars_fit(dir);
    c.responses = {"speed"};
    std::string log;
    REQUIRE(run(c, &log) == kExitSuccess);
    CHECK(log.find("lambda") == std::string::npos);
  }
  SUBCASE("missing column") {
    RunConfig c = cars_fit(dir);
    c.responses = {"speed", "weight"};
    std::string err;
    CHECK(run(c, nullptr, &err) == kExitInputError);
    CHECK(err.find("weight") != std::string::npos);
  }
  SUBCASE("malformed CSV names the row") {
    std::ofstream((dir / "bad.csv").string()) << "a,b\n1,2\n3,x\n";
    RunConfig c = cars_fit(dir);
    c.data = (dir / "bad.csv").string();
    std::string err;
    CHECK(run(c, nullptr, &err) == kExitInputError);
    CHECK(err.find("line 3") != std::string::npos);
  }
  SUBCASE("bad options") {
    RunConfig c = cars_fit(dir);
    c.order_margin = 0;
    CHECK(run(c) == kExitInputError);
    c = cars_fit(dir);
    c.fix_zero = {"1,1"};
    CHECK(run(c) == kExitInputError);
    c = cars_fit(dir);
    c.reference = "cauchy";
    CHECK(run(c) == kExitInputError);
  }
  SUBCASE("non-convergence exits with 2 and writes diagnostics") {
    RunConfig c = cars_fit(dir);
    c.max_outer = 1;
    c.grad_tol = 1e-14;
    CHECK(run(c) == kExitNonConvergence);
    CHECK(fs::exists(dir / "diagnostics.json"));
    CHECK_FALSE(fs::exists(dir / "model.json"));
  }
  SUBCASE("fixed zero and covariates") {
    RunConfig s;
    s.command = "simulate";
    s.design = "trivariate";
    s.n = 300;
    s.R = 1;
    s.out = dir.string();
    REQUIRE(run(s) == kExitSuccess);
    RunConfig c = cars_fit(dir / "tri");
    c.data = (dir / "sim_001.csv").string();
    c.covariates = {"x"};
    c.lambda_terms = "linear";
    c.fix_zero = {"3,2"};
    c.order_margin = 4;
    REQUIRE(run(c) == kExitSuccess);
    CHECK(line_count(dir / "tri" / "parameters.csv") == 1 + 3 * 5 + 2 * 2);
  }
}

TEST_CASE("simulate command") {
  const fs::path a = scratch("sim_a");
  const fs::path b = scratch("sim_b");
  RunConfig c;
  c.command = "simulate";
  c.R = 2;
  c.out = a.string();
  REQUIRE(run(c) == kExitSuccess);
  c.out = b.string();
  REQUIRE(run(c) == kExitSuccess);
  const CsvTable t = read_csv_file((a / "sim_001.csv").string());
  CHECK(t.values.rows() == 1000);
  CHECK(t.header == std::vector<std::string>{"y1", "y2", "x"});
  CHECK(slurp(a / "sim_002.csv") == slurp(b / "sim_002.csv"));
  CHECK(slurp(a / "truth.json") == slurp(b / "truth.json"));
  const auto truth = nlohmann::json::parse(slurp(a / "truth.json"));
  const auto& grid = truth["grid"];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(grid[i].get<double>() - 0.5) < 1e-12) CHECK(truth["lambda"]["lambda_21"][i].get<double>() == 0.25);
  }
  c.n = 1;
  CHECK(run(c) == kExitInputError);
}
