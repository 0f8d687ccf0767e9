#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pchol/errors.hpp"
#include "pchol/experiments.hpp"

using namespace pchol;

namespace {

std::vector<ConvergenceRecord> synthetic_records(
    Index n_max, const std::function<double(Index)>& law) {
  std::vector<ConvergenceRecord> records;
  for (Index n = 1; n <= n_max; ++n) {
    ConvergenceRecord rec;
    rec.n = n;
    rec.sup_residual = law(n);
    records.push_back(rec);
  }
  return records;
}

}  // namespace

TEST_CASE("rate fitting on exact power laws") {
  const auto inv = synthetic_records(
      60, [](Index n) { return 1.0 / static_cast<double>(n); });
  const RateFit f1 = fit_rate(inv, 1, 60, 0.0);
  CHECK(f1.slope == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(f1.intercept == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(f1.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  const auto quad = synthetic_records(40, [](Index n) {
    return 3.0 / (static_cast<double>(n) * static_cast<double>(n));
  });
  const RateFit f2 = fit_rate(quad, 5, 40, 0.0);
  CHECK(f2.slope == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(f2.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-9));

  // Floor exclusion drops roundoff-dominated tails.
  auto floored = synthetic_records(30, [](Index n) {
    return n <= 20 ? 1.0 / static_cast<double>(n) : 1e-15;
  });
  const RateFit f3 = fit_rate(floored, 1, 30, 1e-12);
  CHECK(f3.slope == doctest::Approx(-1.0).epsilon(1e-10));

  CHECK_THROWS_AS(fit_rate(inv, 1, 4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate(inv, 30, 10, 0.0), std::invalid_argument);
}

TEST_CASE("record CSV round-trips to 17 significant digits") {
  std::vector<ConvergenceRecord> records;
  ConvergenceRecord rec;
  rec.n = 3;
  rec.sup_residual = 0.12345678901234567;
  rec.fill = 1.0 / 3.0;
  rec.min_sep = std::numeric_limits<double>::infinity();
  rec.bound_fill = 4.0 * M_PI;
  rec.bound_pack = 17.25;
  rec.bound_c11 = std::numeric_limits<double>::quiet_NaN();
  rec.grid_size = 2001;
  rec.wall_time_ms = 1.5;
  records.push_back(rec);

  std::stringstream out;
  write_records_csv(out, records);
  std::string header, line;
  std::getline(out, header);
  CHECK(header == std::string(kRecordCsvHeader));
  std::getline(out, line);

  std::stringstream fields(line);
  std::string field;
  std::vector<std::string> values;
  while (std::getline(fields, field, ',')) values.push_back(field);
  REQUIRE(values.size() == 9);
  CHECK(std::stol(values[0]) == 3);
  CHECK(std::stod(values[1]) == rec.sup_residual);
  CHECK(std::stod(values[2]) == rec.fill);
  CHECK(std::isinf(std::stod(values[3])));
  CHECK(std::stod(values[4]) == rec.bound_fill);
  CHECK(std::isnan(std::stod(values[6])));
  CHECK(std::stol(values[7]) == 2001);
}

TEST_CASE("config parsing: keys, defaults, comments, errors") {
  std::stringstream in(
      "# demo\n"
      "kernel=gaussian\n"
      "sigma = 1.5\n"
      "dim=2\n"
      "lower=-1,-2\n"
      "upper=1,2\n"
      "grid_m=31\n"
      "strategy=delta:0.5\n"
      "n_max=40\n"
      "seed=9\n"
      "tol=1e-8\n");
  const ExperimentConfig config = parse_config(in);
  CHECK(config.kernel_name == "gaussian");
  CHECK(config.params.at("sigma") == 1.5);
  CHECK(config.dim == 2);
  CHECK(config.lower == std::vector<double>{-1.0, -2.0});
  CHECK(config.upper == std::vector<double>{1.0, 2.0});
  CHECK(config.grid_m == 31);
  CHECK(config.strategy_spec == "delta:0.5");
  CHECK(config.n_max == 40);
  CHECK(config.seed == 9);
  CHECK(config.tol == 1e-8);

  const Domain domain = make_domain(config);
  CHECK(domain.upper()[1] == 2.0);

  std::stringstream bad_key("wat=1\n");
  CHECK_THROWS_AS(parse_config(bad_key), std::invalid_argument);
  std::stringstream bad_line("kernel\n");
  CHECK_THROWS_AS(parse_config(bad_line), std::invalid_argument);
  std::stringstream bad_value("n_max=abc\n");
  CHECK_THROWS(parse_config(bad_value));

  // Defaults: symmetric unit box, complete pivoting.
  std::stringstream minimal("kernel=ou\n");
  const ExperimentConfig defaults = parse_config(minimal);
  CHECK(defaults.dim == 1);
  CHECK(make_domain(defaults).lower()[0] == -1.0);
  CHECK(defaults.strategy_spec == "complete");
}

TEST_CASE("strategy spec parsing") {
  const Domain box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
  CHECK(std::holds_alternative<CompleteStrategy>(parse_strategy("complete", box)));
  const auto delta = parse_strategy("delta:0.25", box);
  CHECK(std::get<DeltaCompleteStrategy>(delta).delta == 0.25);
  const auto uniform = parse_strategy("uniform:5", box);
  CHECK(std::get<UniformStrategy>(uniform).pivot_points.cols() == 5);
  const auto random = parse_strategy("random:7", box);
  CHECK(std::get<RandomStrategy>(random).seed == 7u);
  const auto maxvol = parse_strategy("maxvol:3", box);
  CHECK(std::get<LocalMaxVolStrategy>(maxvol).max_sweeps == 3);
  CHECK_THROWS_AS(parse_strategy("rook", box), std::invalid_argument);
  CHECK_THROWS_AS(parse_strategy("delta", box), std::invalid_argument);
}

TEST_CASE("named kernels and unknown-name rejection") {
  const Kernel matern = make_named_kernel("matern", {{"nu", 1.5}, {"ell", 0.5}},
                                          1, 1.0);
  CHECK(matern.c11_constants().has_value());
  CHECK_THROWS_AS(make_named_kernel("spline", {}, 1, 1.0), std::invalid_argument);
}

TEST_CASE("cmd_convergence: CSV shape, determinism, reported slope") {
  ExperimentConfig config;
  config.kernel_name = "matern";
  config.params = {{"nu", 0.5}, {"ell", 0.5}};
  config.grid_m = 501;
  config.n_max = 60;
  config.fit_lo = 10;
  config.fit_hi = 60;

  std::stringstream csv1, log1, csv2, log2;
  CHECK(cmd_convergence(config, csv1, log1) == 0);
  CHECK(cmd_convergence(config, csv2, log2) == 0);

  auto strip_wall_time = [](std::stringstream& ss) {
    std::string out, line;
    while (std::getline(ss, line)) {
      const auto last_comma = line.rfind(',');
      out += line.substr(0, last_comma);
      out += '\n';
    }
    return out;
  };
  CHECK(strip_wall_time(csv1) == strip_wall_time(csv2));
  CHECK(log1.str().find("slope=-") != std::string::npos);
  CHECK(log1.str().find("violations 0") != std::string::npos);

  // Row count: header + 60 records.
  std::stringstream recount(csv2.str());
  std::string line;
  Index rows = 0;
  while (std::getline(recount, line)) ++rows;
  CHECK(rows == 61);
}

TEST_CASE("cmd_bounds: clean runs exit 0, uncertified kernels are rejected") {
  ExperimentConfig config;
  config.kernel_name = "brownian";
  config.grid_m = 301;
  config.n_max = 25;
  std::stringstream log;
  CHECK(cmd_bounds(config, log) == 0);

  config.strategy_spec = "delta:0.25";
  config.seed = 5;
  std::stringstream log2;
  CHECK(cmd_bounds(config, log2) == 0);
}

TEST_CASE("cmd_matrix: CSV, bound satisfaction, exact low rank") {
  const Index m = 50;
  std::mt19937_64 rng(3);

  // Discretized Brownian.
  std::stringstream file;
  file.precision(17);
  file << m << '\n';
  const Matrix a = oracles::brownian_matrix(m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) file << (j ? " " : "") << a(i, j);
    file << '\n';
  }
  std::stringstream csv, log;
  CHECK(cmd_matrix(file, 0, csv, log) == 0);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "n,residual_max,bound");
  Index rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == m);

  // Rank-3 Gram: three steps suffice, then the run reports breakdown.
  std::stringstream file3;
  file3.precision(17);
  const Matrix g3 = oracles::random_spd(30, 3, rng);
  file3 << 30 << '\n';
  for (Index i = 0; i < 30; ++i) {
    for (Index j = 0; j < 30; ++j) file3 << (j ? " " : "") << g3(i, j);
    file3 << '\n';
  }
  std::stringstream csv3, log3;
  const int code = cmd_matrix(file3, 30, csv3, log3);
  CHECK(code == 3);
  std::getline(csv3, line);  // header
  std::vector<double> residuals;
  while (std::getline(csv3, line)) {
    if (line.rfind("#", 0) == 0) continue;
    residuals.push_back(std::stod(line.substr(line.find(',') + 1)));
  }
  REQUIRE(residuals.size() == 3);
  CHECK(residuals.back() <= 1e-10 * g3.cwiseAbs().maxCoeff());

  std::stringstream garbage("not a matrix");
  std::stringstream csv4, log4;
  CHECK_THROWS_AS(cmd_matrix(garbage, 0, csv4, log4), std::invalid_argument);
}

TEST_CASE("cmd_gp_demo emits one row per grid point with interpolating means") {
  ExperimentConfig config;
  config.kernel_name = "matern";
  config.params = {{"nu", 1.5}, {"ell", 0.5}};
  config.grid_m = 201;
  config.sites = 12;
  config.function = "runge";

  std::stringstream csv, log;
  CHECK(cmd_gp_demo(config, csv, log) == 0);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "x0,posterior_mean,posterior_sd,true_value");
  Index rows = 0;
  std::string line;
  double worst_sd = 0.0;
  while (std::getline(csv, line)) {
    ++rows;
    std::stringstream fields(line);
    std::string x, mean, sd, truth;
    std::getline(fields, x, ',');
    std::getline(fields, mean, ',');
    std::getline(fields, sd, ',');
    std::getline(fields, truth, ',');
    CHECK(std::stod(sd) >= 0.0);
    worst_sd = std::max(worst_sd, std::stod(sd));
  }
  CHECK(rows == 201);
  CHECK(worst_sd < 1.0);
}

TEST_CASE("cmd_catalog lists every built-in kernel") {
  std::stringstream out;
  CHECK(cmd_catalog(out) == 0);
  const std::string text = out.str();
  for (const char* name : {"ou", "matern", "brownian", "green1d", "gaussian",
                           "rational-a", "rational-b"})
    CHECK(text.find(name) != std::string::npos);
}

TEST_CASE("named test functions") {
  CHECK(named_function("sine")(Vector::Constant(1, 0.5)) ==
        doctest::Approx(1.0));
  CHECK(named_function("runge")(Vector::Constant(1, 0.0)) ==
        doctest::Approx(1.0));
  CHECK(named_function("absnorm")(Vector::Constant(1, -0.5)) ==
        doctest::Approx(0.5));
  CHECK_THROWS_AS(named_function("mystery"), std::invalid_argument);
}
