#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "pchol/errors.hpp"
#include "pchol/experiments.hpp"

namespace {

pchol::ExperimentConfig load_config(const std::string& config_path,
                                    const std::string& strategy_override,
                                    int seed_override) {
  pchol::ExperimentConfig config;
  if (!config_path.empty()) config = pchol::parse_config_file(config_path);
  if (!strategy_override.empty()) config.strategy_spec = strategy_override;
  if (seed_override >= 0) config.seed = static_cast<unsigned>(seed_override);
  return config;
}

int with_csv_sink(const std::string& out_path,
                  const std::function<int(std::ostream&)>& body) {
  if (out_path.empty()) return body(std::cout);
  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot open output file '" + out_path + "'");
  return body(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pivoted Cholesky approximation of SPD kernels and matrices"};
  app.require_subcommand(1);

  std::string config_path, out_path, strategy_spec;
  int seed = -1;

  auto add_common = [&](CLI::App* cmd, bool wants_config) {
    if (wants_config)
      cmd->add_option("--config", config_path, "key=value config file");
    cmd->add_option("--out", out_path, "CSV output path (default: stdout)");
    cmd->add_option("--strategy", strategy_spec,
                    "complete|delta:<d>|uniform:<m>|random:<seed>|maxvol:<sweeps>");
    cmd->add_option("--seed", seed, "seed override");
  };

  auto* conv = app.add_subcommand("convergence",
                                  "run a factorization, emit a per-step CSV "
                                  "trace and the fitted log-log rate");
  add_common(conv, true);

  auto* bounds = app.add_subcommand(
      "bounds", "run a factorization and check every applicable error bound");
  add_common(bounds, true);

  std::string matrix_path;
  long matrix_n_max = 0;
  auto* matrix = app.add_subcommand(
      "matrix", "pivoted Cholesky on a dense SPD matrix file, per-step CSV");
  matrix->add_option("path", matrix_path, "matrix file (order, then rows)")
      ->required();
  matrix->add_option("--n-max", matrix_n_max, "steps (default: full order)");
  matrix->add_option("--out", out_path, "CSV output path (default: stdout)");

  auto* gp = app.add_subcommand(
      "gp-demo", "fit a noise-free GP at greedily chosen sites, emit CSV");
  add_common(gp, true);
  std::string function_name;
  long site_count = 0;
  gp->add_option("--function", function_name, "sine|runge|absnorm");
  gp->add_option("--sites", site_count, "number of observation sites");

  auto* catalog =
      app.add_subcommand("catalog", "list built-in kernels and their constants");
  (void)catalog;

  CLI11_PARSE(app, argc, argv);

  try {
    if (conv->parsed()) {
      const auto config = load_config(config_path, strategy_spec, seed);
      return with_csv_sink(out_path, [&](std::ostream& csv) {
        return pchol::cmd_convergence(config, csv, std::cerr);
      });
    }
    if (bounds->parsed()) {
      const auto config = load_config(config_path, strategy_spec, seed);
      return pchol::cmd_bounds(config, std::cerr);
    }
    if (matrix->parsed()) {
      std::ifstream in(matrix_path);
      if (!in)
        throw std::invalid_argument("cannot open matrix file '" + matrix_path + "'");
      return with_csv_sink(out_path, [&](std::ostream& csv) {
        return pchol::cmd_matrix(in, matrix_n_max, csv, std::cerr);
      });
    }
    if (gp->parsed()) {
      auto config = load_config(config_path, strategy_spec, seed);
      if (!function_name.empty()) config.function = function_name;
      if (site_count > 0) config.sites = site_count;
      return with_csv_sink(out_path, [&](std::ostream& csv) {
        return pchol::cmd_gp_demo(config, csv, std::cerr);
      });
    }
    return pchol::cmd_catalog(std::cout);
  } catch (const pchol::BreakdownError& err) {
    std::cerr << "breakdown: " << err.what() << "\n";
    return 3;
  } catch (const pchol::NumericError& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
