#include "pchol/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pchol/errors.hpp"
#include "pchol/gp.hpp"
#include "pchol/matrix.hpp"

namespace pchol {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_double_list(const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t used = 0;
    out.push_back(std::stod(item, &used));
    if (used != item.size())
      throw std::invalid_argument("config: bad numeric value '" + item + "'");
  }
  if (out.empty()) throw std::invalid_argument("config: empty numeric list");
  return out;
}

double parse_one_double(const std::string& value) {
  const auto list = parse_double_list(value);
  if (list.size() != 1)
    throw std::invalid_argument("config: expected a single value, got '" + value + "'");
  return list[0];
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  bool lower_set = false, upper_set = false;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "kernel") {
      config.kernel_name = value;
    } else if (key == "dim") {
      config.dim = static_cast<int>(parse_one_double(value));
    } else if (key == "lower") {
      config.lower = parse_double_list(value);
      lower_set = true;
    } else if (key == "upper") {
      config.upper = parse_double_list(value);
      upper_set = true;
    } else if (key == "grid_m") {
      config.grid_m = static_cast<int>(parse_one_double(value));
    } else if (key == "strategy") {
      config.strategy_spec = value;
    } else if (key == "n_max") {
      config.n_max = static_cast<Index>(parse_one_double(value));
    } else if (key == "seed") {
      config.seed = static_cast<unsigned>(parse_one_double(value));
    } else if (key == "tol") {
      config.tol = parse_one_double(value);
    } else if (key == "fit_lo") {
      config.fit_lo = static_cast<Index>(parse_one_double(value));
    } else if (key == "fit_hi") {
      config.fit_hi = static_cast<Index>(parse_one_double(value));
    } else if (key == "function") {
      config.function = value;
    } else if (key == "sites") {
      config.sites = static_cast<Index>(parse_one_double(value));
    } else if (key == "nu" || key == "ell" || key == "alpha" || key == "sigma" ||
               key == "shift") {
      config.params[key] = parse_one_double(value);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (!lower_set) config.lower.assign(config.dim, -1.0);
  if (!upper_set) config.upper.assign(config.dim, 1.0);
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  return parse_config(in);
}

int default_grid_m(int dim) {
  switch (dim) {
    case 1:
      return 2001;
    case 2:
      return 201;
    case 3:
      return 41;
    default:
      throw std::invalid_argument("no default grid density for dim " +
                                  std::to_string(dim));
  }
}

Domain make_domain(const ExperimentConfig& config) {
  auto expand = [&](const std::vector<double>& values) {
    Vector out(config.dim);
    if (values.size() == 1) {
      out.setConstant(values[0]);
    } else if (static_cast<int>(values.size()) == config.dim) {
      for (int a = 0; a < config.dim; ++a) out[a] = values[a];
    } else {
      throw std::invalid_argument("config: bounds must list 1 or dim values");
    }
    return out;
  };
  return Domain(expand(config.lower), expand(config.upper));
}

Kernel make_named_kernel(const std::string& name,
                         const std::map<std::string, double>& params, int dim,
                         double coord_max) {
  auto get = [&](const char* key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "matern") return matern_kernel(dim, get("nu", 0.5), get("ell", 0.5));
  if (name == "ou") return ou_kernel(dim, get("alpha", 1.0), get("ell", 0.5));
  if (name == "brownian") return brownian_kernel(dim, get("shift", 1.0), coord_max);
  if (name == "gaussian") return gaussian_kernel(dim, get("sigma", 1.0));
  if (name == "green1d") return green1d_kernel();
  if (name == "rational-a") return rational_a_kernel();
  if (name == "rational-b") return rational_b_kernel();
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

PivotStrategy parse_strategy(const std::string& spec, const Domain& domain) {
  const auto colon = spec.find(':');
  const std::string head = colon == std::string::npos ? spec : spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto need_arg = [&]() {
    if (arg.empty())
      throw std::invalid_argument("strategy '" + head + "' needs an argument");
    return std::stod(arg);
  };
  if (head == "complete") return CompleteStrategy{};
  if (head == "delta") return DeltaCompleteStrategy{need_arg()};
  if (head == "uniform")
    return uniform_tensor_pivots(domain, static_cast<int>(need_arg()));
  if (head == "random") return RandomStrategy{static_cast<unsigned>(need_arg())};
  if (head == "maxvol") return LocalMaxVolStrategy{static_cast<int>(need_arg())};
  throw std::invalid_argument("unknown strategy '" + spec + "'");
}

RunConfig to_run_config(const ExperimentConfig& config) {
  Domain domain = make_domain(config);
  const double coord_max = domain.upper().maxCoeff();
  RunConfig run_config{
      make_named_kernel(config.kernel_name, config.params, config.dim, coord_max),
      domain,
      config.grid_m > 0 ? config.grid_m : default_grid_m(config.dim),
      parse_strategy(config.strategy_spec, domain),
      config.n_max,
      config.tol,
      config.seed,
      kDefaultGridCap};
  return run_config;
}

namespace {

struct StrategyKind {
  bool complete = false;
  bool delta = false;
  bool maxvol = false;
  double delta_value = 1.0;
};

StrategyKind classify(const PivotStrategy& strategy) {
  StrategyKind kind;
  if (std::holds_alternative<CompleteStrategy>(strategy)) kind.complete = true;
  if (const auto* dc = std::get_if<DeltaCompleteStrategy>(&strategy)) {
    kind.delta = true;
    kind.delta_value = dc->delta;
  }
  if (std::holds_alternative<LocalMaxVolStrategy>(strategy)) kind.maxvol = true;
  return kind;
}

void tally(BoundCheck& check, double value, double bound, double slack) {
  if (bound > 0.0 && std::isfinite(bound)) {
    const double ratio = value / bound;
    if (ratio > check.worst_ratio) check.worst_ratio = ratio;
  }
  if (value > bound + slack) ++check.violations;
}

double initial_diag_min(const Kernel& kernel, const CandidateGrid& grid) {
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < grid.size(); ++i)
    best = std::min(best, kernel(grid.point(i), grid.point(i)));
  return best;
}

}  // namespace

std::vector<BoundCheck> check_bounds(
    const std::vector<ConvergenceRecord>& records, const RunConfig& config,
    std::optional<bool> maxvol_converged, double diag_min) {
  StrategyKind kind = classify(config.strategy);
  if (kind.maxvol && !(maxvol_converged && *maxvol_converged))
    kind.maxvol = false;  // only locally optimal sets carry set-level bounds
  const bool enforce_fill_decay = diag_min > 0.0;
  const auto diag_l = config.kernel.diag_lipschitz();
  const auto c11 = config.kernel.c11_constants();
  const double slack = 1e-10;
  const double radius = config.domain.radius();
  const double dim = static_cast<double>(config.domain.dim());

  BoundCheck fill{"residual<=4L(fill+eta)"};
  BoundCheck pack{"residual<=packing"};
  BoundCheck sep{"residual<=4L*min_sep"};
  BoundCheck pack_sep{"min_sep<=2R/(n^{1/d}-1)"};
  BoundCheck fill_decay{"fill<=2R/(n^{1/d}-1)+eta"};
  BoundCheck quad{"residual<=c11*(fill+eta)^2"};

  for (const auto& rec : records) {
    const bool last = rec.n == records.back().n;
    if (diag_l) {
      tally(fill, rec.sup_residual, rec.bound_fill, slack);
      if (rec.n > 1 && (kind.complete || kind.delta || (kind.maxvol && last))) {
        const double bound =
            kind.delta ? rec.bound_pack / kind.delta_value : rec.bound_pack;
        tally(pack, rec.sup_residual, bound, slack);
      }
      if (rec.n > 1 && (kind.complete || (kind.maxvol && last)))
        tally(sep, rec.sup_residual, 4.0 * *diag_l * rec.min_sep, slack);
    }
    if (rec.n > 1 && (kind.complete || (kind.maxvol && last))) {
      const double root = std::pow(static_cast<double>(rec.n), 1.0 / dim);
      const double geom = 2.0 * radius / (root - 1.0);
      tally(pack_sep, rec.min_sep, geom, 1e-12 * radius);
      const double eta = diag_l ? rec.bound_fill / (4.0 * *diag_l) - rec.fill
                                : 0.0;  // recover eta from the stored bound
      const double slack_geom =
          enforce_fill_decay ? 1e-12 * radius
                             : std::numeric_limits<double>::infinity();
      tally(fill_decay, rec.fill, geom + eta, slack_geom);
    }
    if (c11 && std::isfinite(rec.bound_c11))
      tally(quad, rec.sup_residual, rec.bound_c11, slack);
  }

  std::vector<BoundCheck> out;
  if (diag_l) out.push_back(fill);
  if (diag_l && (kind.complete || kind.delta || kind.maxvol)) out.push_back(pack);
  if (diag_l && (kind.complete || kind.maxvol)) out.push_back(sep);
  if (kind.complete || kind.maxvol) {
    out.push_back(pack_sep);
    out.push_back(fill_decay);
  }
  if (c11) out.push_back(quad);
  return out;
}

std::function<double(ConstVecRef)> named_function(const std::string& name) {
  if (name == "sine")
    return [](ConstVecRef x) { return std::sin(M_PI * x.sum()); };
  if (name == "runge")
    return [](ConstVecRef x) { return 1.0 / (1.0 + 25.0 * x.squaredNorm()); };
  if (name == "absnorm")
    return [](ConstVecRef x) { return x.norm(); };
  throw std::invalid_argument("unknown test function '" + name + "'");
}

namespace {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int cmd_convergence(const ExperimentConfig& config, std::ostream& csv,
                    std::ostream& log) {
  RunConfig run_config = to_run_config(config);
  RunResult result = run(run_config);
  write_records_csv(csv, result.records);
  if (result.status == RunStatus::breakdown)
    csv << "# warning: breakdown after step " << result.records.size() << '\n';

  const Index fit_hi = config.fit_hi > 0 ? config.fit_hi : config.n_max;
  const double floor = 10.0 * result.state.breakdown_tolerance();
  try {
    const RateFit fit = fit_rate(result.records, config.fit_lo, fit_hi, floor);
    log << "rate: slope=" << fit.slope << " intercept=" << fit.intercept
        << " r2=" << fit.r_squared << " over n in [" << fit.n_lo << ","
        << fit.n_hi << "]\n";
  } catch (const std::invalid_argument& err) {
    log << "rate: not fitted (" << err.what() << ")\n";
  }

  Index violations = 0;
  for (const auto& check : check_bounds(result.records, run_config, result.maxvol_converged,
                          initial_diag_min(run_config.kernel, result.state.grid()))) {
    log << "bound " << check.name << ": worst ratio "
        << format_g17(check.worst_ratio) << ", violations " << check.violations
        << "\n";
    violations += check.violations;
  }
  if (violations > 0) return 2;
  if (result.status == RunStatus::breakdown) return 3;
  return 0;
}

int cmd_bounds(const ExperimentConfig& config, std::ostream& log) {
  RunConfig run_config = to_run_config(config);
  if (!run_config.kernel.diag_lipschitz())
    throw std::invalid_argument(
        "bounds: kernel '" + run_config.kernel.name() +
        "' carries no certified diagonal-Lipschitz constant");
  RunResult result = run(run_config);
  Index violations = 0;
  for (const auto& check : check_bounds(result.records, run_config, result.maxvol_converged,
                          initial_diag_min(run_config.kernel, result.state.grid()))) {
    log << "bound " << check.name << ": worst ratio "
        << format_g17(check.worst_ratio) << ", violations " << check.violations
        << "\n";
    violations += check.violations;
  }
  log << "steps recorded: " << result.records.size() << "\n";
  return violations > 0 ? 2 : 0;
}

int cmd_matrix(std::istream& matrix_in, Index n_max, std::ostream& csv,
               std::ostream& log) {
  const SpdMatrix a = read_matrix(matrix_in);
  const Index m = a.order();
  if (n_max <= 0 || n_max > m) n_max = m;
  const double ga = discrete_lipschitz(a);

  MatrixFactorization f;
  bool broke_down = false;
  try {
    f = matrix_pivoted_cholesky(a, n_max);
  } catch (const BreakdownError& err) {
    broke_down = true;
    f = matrix_pivoted_cholesky(a, err.steps_completed() > 0
                                       ? static_cast<Index>(err.steps_completed())
                                       : 1);
  }

  csv << "n,residual_max,bound\n";
  Matrix residual = a.entries();
  Index violations = 0;
  const double slack = 1e-10 * a.max_abs();
  for (Index k = 0; k < f.steps(); ++k) {
    residual.noalias() -= f.factor.col(k) * f.factor.col(k).transpose();
    const double rmax = residual.cwiseAbs().maxCoeff();
    const Index n = k + 1;
    const double bound =
        n > 1 ? 4.0 * static_cast<double>(m - 1) * ga / static_cast<double>(n - 1)
              : std::numeric_limits<double>::infinity();
    csv << n << ',' << format_g17(rmax) << ',' << format_g17(bound) << '\n';
    if (n > 1 && rmax > bound + slack) ++violations;
  }
  if (broke_down)
    csv << "# warning: breakdown after step " << f.steps() << '\n';
  log << "order " << m << ", G_A = " << format_g17(ga) << ", steps "
      << f.steps() << ", violations " << violations << "\n";
  if (violations > 0) return 2;
  if (broke_down && f.steps() < n_max) return 3;
  return 0;
}

int cmd_gp_demo(const ExperimentConfig& config, std::ostream& csv,
                std::ostream& log) {
  ExperimentConfig site_config = config;
  site_config.strategy_spec = "complete";
  site_config.n_max = config.sites;
  site_config.tol = 0.0;
  RunConfig run_config = to_run_config(site_config);
  RunResult result = run(run_config);
  const Index n = result.state.steps();

  Matrix sites(run_config.domain.dim(), n);
  for (Index i = 0; i < n; ++i) sites.col(i) = result.state.pivot_point(i);
  const auto target = named_function(config.function);
  Vector values(n);
  for (Index i = 0; i < n; ++i) values[i] = target(sites.col(i));

  GpPosterior gp(run_config.kernel, sites, values);
  const CandidateGrid& grid = result.state.grid();
  for (int a = 0; a < grid.dim(); ++a) csv << "x" << a << ',';
  csv << "posterior_mean,posterior_sd,true_value\n";
  for (Index i = 0; i < grid.size(); ++i) {
    const auto x = grid.point(i);
    for (int a = 0; a < grid.dim(); ++a) csv << format_g17(x[a]) << ',';
    const double var = gp.variance(x);
    csv << format_g17(gp.mean(x)) << ','
        << format_g17(std::sqrt(std::max(var, 0.0))) << ','
        << format_g17(target(x)) << '\n';
  }
  log << "fitted " << n << " sites for function '" << config.function << "'\n";
  return 0;
}

int cmd_catalog(std::ostream& out) {
  out << "name dim diag_lipschitz c11_deriv c11_grad\n";
  for (const Kernel& kernel : build_catalog()) {
    out << kernel.name() << ' ' << kernel.dim() << ' ';
    if (kernel.diag_lipschitz())
      out << format_g17(*kernel.diag_lipschitz());
    else
      out << "-";
    if (const auto c11 = kernel.c11_constants())
      out << ' ' << format_g17(c11->deriv_lipschitz) << ' '
          << format_g17(c11->first_arg_lipschitz) << '\n';
    else
      out << " - -\n";
  }
  return 0;
}

}  // namespace pchol
