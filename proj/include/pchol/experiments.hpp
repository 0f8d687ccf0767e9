#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pchol/pivoting.hpp"

namespace pchol {

/// Flat key=value experiment description, as read from a config file.
/// Unset numeric fields keep their defaults; lower/upper accept
/// comma-separated per-axis values or a single value applied to every axis.
struct ExperimentConfig {
  std::string kernel_name = "matern";
  std::map<std::string, double> params;  // nu, ell, alpha, sigma, shift
  int dim = 1;
  std::vector<double> lower{-1.0};
  std::vector<double> upper{1.0};
  int grid_m = 0;  // 0 -> dimension default (2001, 201, 41)
  std::string strategy_spec = "complete";
  Index n_max = 100;
  unsigned seed = 0;
  double tol = 0.0;
  Index fit_lo = 10;
  Index fit_hi = 0;  // 0 -> n_max
  std::string function = "sine";  // gp-demo target
  Index sites = 10;               // gp-demo site count
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);

/// Catalog kernel by CLI name. coord_max feeds the Brownian constant (the
/// largest upper bound of the working box).
Kernel make_named_kernel(const std::string& name,
                         const std::map<std::string, double>& params, int dim,
                         double coord_max);

/// "complete" | "delta:<v>" | "uniform:<m>" | "random:<seed>" | "maxvol:<sweeps>"
PivotStrategy parse_strategy(const std::string& spec, const Domain& domain);

Domain make_domain(const ExperimentConfig& config);
RunConfig to_run_config(const ExperimentConfig& config);

/// Default candidate-grid density per dimension: dense enough that the grid
/// spacing stays well below the first fill distances, under the point cap.
int default_grid_m(int dim);

/// One theorem-backed check evaluated over a run's records.
struct BoundCheck {
  std::string name;
  Index violations = 0;
  double worst_ratio = 0.0;  // max over applicable steps of value / bound
};

/// Evaluates every bound applicable to the configured strategy and kernel
/// metadata. Residual-vs-bound checks carry a +1e-10 absolute slack; the
/// packing bounds apply from n = 2. Set-level max-vol guarantees hold only
/// for locally optimal sets, so they are checked at the final recorded step
/// and only when maxvol_converged is true.
///
/// The fill-decay check (fill <= 2R/(n^{1/d}-1) + eta under complete
/// pivoting) is reported for every run but counted as a violation only when
/// diag_min > 0: where the kernel diagonal vanishes, regions of inherently
/// tiny residual are legitimately never pivoted and their fill stalls even
/// though every residual bound continues to hold.
std::vector<BoundCheck> check_bounds(
    const std::vector<ConvergenceRecord>& records, const RunConfig& config,
    std::optional<bool> maxvol_converged = std::nullopt,
    double diag_min = 1.0);

// --- CLI commands (exit codes: 0 ok, 1 input, 2 bound violation, 3 breakdown)

int cmd_convergence(const ExperimentConfig& config, std::ostream& csv,
                    std::ostream& log);
int cmd_bounds(const ExperimentConfig& config, std::ostream& log);
int cmd_matrix(std::istream& matrix_in, Index n_max, std::ostream& csv,
               std::ostream& log);
int cmd_gp_demo(const ExperimentConfig& config, std::ostream& csv,
                std::ostream& log);
int cmd_catalog(std::ostream& out);

/// Named scalar test functions for gp-demo: "sine", "runge", "absnorm".
std::function<double(ConstVecRef)> named_function(const std::string& name);

}  // namespace pchol
