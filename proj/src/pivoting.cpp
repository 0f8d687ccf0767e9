#include "pchol/pivoting.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pchol/errors.hpp"

namespace pchol {

UniformStrategy uniform_tensor_pivots(const Domain& domain, int points_per_axis) {
  CandidateGrid grid = tensor_grid(domain, points_per_axis);
  return UniformStrategy{grid.points()};
}

Index select_complete(const CholeskyState& state) {
  const auto [idx, value] = state.max_diag();
  if (!(value > state.breakdown_tolerance()))
    throw BreakdownError("select_complete: residual is numerically exhausted",
                         static_cast<long>(state.steps()));
  return idx;
}

Index select_delta_complete(const CholeskyState& state, double delta,
                            std::mt19937_64& rng) {
  if (!(delta > 0.0) || delta > 1.0)
    throw std::invalid_argument("delta-complete: delta must lie in (0, 1]");
  const auto [max_idx, max_value] = state.max_diag();
  if (!(max_value > state.breakdown_tolerance()))
    throw BreakdownError("delta-complete: residual is numerically exhausted",
                         static_cast<long>(state.steps()));
  const double threshold =
      std::max(delta * max_value, state.breakdown_tolerance());
  const Vector& diag = state.raw_diag();
  std::vector<Index> admissible;
  for (Index i = 0; i < diag.size(); ++i)
    if (diag[i] >= threshold && diag[i] > state.breakdown_tolerance())
      admissible.push_back(i);
  if (admissible.empty()) return max_idx;  // threshold == max, roundoff edge
  std::uniform_int_distribution<std::size_t> pick(0, admissible.size() - 1);
  return admissible[pick(rng)];
}

Index select_delta_complete(const CholeskyState& state, double delta,
                            unsigned seed) {
  std::mt19937_64 rng(seed);
  return select_delta_complete(state, delta, rng);
}

Index select_random(const CholeskyState& state, std::mt19937_64& rng) {
  const Vector& diag = state.raw_diag();
  std::vector<Index> admissible;
  for (Index i = 0; i < diag.size(); ++i)
    if (diag[i] > state.breakdown_tolerance()) admissible.push_back(i);
  if (admissible.empty())
    throw BreakdownError("select_random: residual is numerically exhausted",
                         static_cast<long>(state.steps()));
  std::uniform_int_distribution<std::size_t> pick(0, admissible.size() - 1);
  return admissible[pick(rng)];
}

namespace {

CholeskyState factorize(const CholeskyState& initial,
                        const std::vector<Index>& pivots) {
  CholeskyState state = initial;
  state.reserve(static_cast<Index>(pivots.size()));
  for (Index p : pivots) state = state.stepped(p);
  return state;
}

}  // namespace

MaxVolResult local_maxvol(const CholeskyState& initial, Index n, int max_sweeps) {
  if (initial.steps() != 0)
    throw std::invalid_argument("local_maxvol: expects an unstepped state");
  if (n < 1 || n > initial.grid().size())
    throw std::invalid_argument("local_maxvol: n out of range");
  if (max_sweeps < 1)
    throw std::invalid_argument("local_maxvol: max_sweeps must be >= 1");

  std::vector<Index> pivots;
  CholeskyState state = initial;
  state.reserve(n);
  for (Index k = 0; k < n; ++k) {
    // A kernel of numerical rank below n caps the achievable set size.
    if (!(state.max_diag().second > state.breakdown_tolerance())) break;
    const Index idx = state.max_diag().first;
    try {
      state = state.stepped(idx);
    } catch (const NumericError&) {
      break;  // precision exhausted one step early
    }
    pivots.push_back(idx);
  }
  n = static_cast<Index>(pivots.size());
  if (n == 0)
    throw BreakdownError("local_maxvol: kernel is numerically rank zero", 0);

  MaxVolResult result;
  const double swap_gain = 1.0 + 1e-10;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (Index k = 0; k < n; ++k) {
      // Leave-one-out residual diagonal without pivot k, by downdating:
      // with T the pivot cross matrix and C the columns, the unit column
      // that pivot k contributes on top of the others is C v / ||v|| for
      // v = T^{-1} e_k, so  diag_loo = diag + (C v)^2 / ||v||^2.
      const Matrix t = state.cross_matrix();
      Vector v = Vector::Zero(n);
      for (Index i = k; i < n; ++i) {
        double acc = (i == k) ? 1.0 : 0.0;
        for (Index j = k; j < i; ++j) acc -= t(i, j) * v[j];
        v[i] = acc / t(i, i);
      }
      Vector contrib = state.columns() * v;
      Vector loo_diag =
          state.raw_diag() + contrib.cwiseAbs2() / v.squaredNorm();
      const auto [candidate, cand_value] = slack_argmax(loo_diag);
      if (candidate == pivots[static_cast<std::size_t>(k)]) continue;
      const double held_value = loo_diag[pivots[static_cast<std::size_t>(k)]];
      if (cand_value > held_value * swap_gain) {
        const Index held = pivots[static_cast<std::size_t>(k)];
        pivots[static_cast<std::size_t>(k)] = candidate;
        try {
          state = factorize(initial, pivots);
          changed = true;
        } catch (const BreakdownError&) {
          // The swap made a later pivot numerically redundant; reject it.
          pivots[static_cast<std::size_t>(k)] = held;
        } catch (const NumericError&) {
          pivots[static_cast<std::size_t>(k)] = held;
        }
      }
    }
    result.sweeps_used = sweep + 1;
    if (!changed) {
      result.converged = true;
      break;
    }
  }
  result.pivot_indices = std::move(pivots);
  return result;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct BoundContext {
  std::optional<double> diag_l;
  std::optional<C11Constants> c11;
  double kmin = 0.0;  // min of the initial diagonal over the grid
  double radius = 0.0;
  int dim = 1;
};

ConvergenceRecord make_record(Index n, const CholeskyState& state,
                              const CoverageTracker& tracker,
                              const BoundContext& ctx, double eta,
                              double wall_ms) {
  ConvergenceRecord rec;
  rec.n = n;
  rec.sup_residual = state.residual_sup_norm();
  rec.fill = tracker.fill_distance();
  rec.min_sep = tracker.min_separation();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  rec.bound_fill =
      ctx.diag_l ? 4.0 * *ctx.diag_l * (rec.fill + eta) : nan;
  if (ctx.diag_l) {
    const double root = std::pow(static_cast<double>(n),
                                 1.0 / static_cast<double>(ctx.dim));
    rec.bound_pack = n > 1 ? 8.0 * *ctx.diag_l * ctx.radius / (root - 1.0) : inf;
  } else {
    rec.bound_pack = nan;
  }
  if (ctx.c11 && ctx.kmin > 0.0) {
    const double c = std::sqrt(static_cast<double>(ctx.dim)) *
                     (2.0 * ctx.c11->deriv_lipschitz +
                      ctx.c11->first_arg_lipschitz *
                          ctx.c11->first_arg_lipschitz / ctx.kmin);
    rec.bound_c11 = c * (rec.fill + eta) * (rec.fill + eta);
  } else {
    rec.bound_c11 = nan;
  }
  rec.grid_size = state.grid().size();
  rec.wall_time_ms = wall_ms;
  return rec;
}

BoundContext make_context(const RunConfig& config, const CholeskyState& state) {
  BoundContext ctx;
  ctx.diag_l = config.kernel.diag_lipschitz();
  ctx.c11 = config.kernel.c11_constants();
  ctx.kmin = state.raw_diag().minCoeff();
  ctx.radius = config.domain.radius();
  ctx.dim = config.domain.dim();
  return ctx;
}

void validate_run_config(const RunConfig& config, Index grid_size) {
  if (config.n_max < 1)
    throw std::invalid_argument("run: n_max must be >= 1");
  if (config.n_max > grid_size)
    throw std::invalid_argument("run: n_max exceeds the grid size");
  if (config.kernel.dim() != config.domain.dim())
    throw std::invalid_argument("run: kernel/domain dimension mismatch");
}

RunResult replay_pivots(const RunConfig& config, const CholeskyState& initial,
                        const std::vector<Index>& pivots,
                        Clock::time_point start) {
  RunResult result{initial, {}, RunStatus::completed, std::nullopt};
  const BoundContext ctx = make_context(config, initial);
  const double eta = initial.grid().spacing();
  CoverageTracker tracker(initial.grid_ptr());
  CholeskyState state = initial;
  state.reserve(static_cast<Index>(pivots.size()));
  Index n = 0;
  for (Index p : pivots) {
    state = state.stepped(p);
    tracker.add_pivot(state.grid().point(p));
    ++n;
    result.records.push_back(
        make_record(n, state, tracker, ctx, eta, elapsed_ms(start)));
    if (config.stop_tolerance > 0.0 &&
        result.records.back().sup_residual < config.stop_tolerance) {
      result.status = RunStatus::converged;
      break;
    }
  }
  result.state = std::move(state);
  return result;
}

}  // namespace

RunResult run(const RunConfig& config) {
  const auto start = Clock::now();
  auto grid = std::make_shared<const CandidateGrid>(
      tensor_grid(config.domain, config.grid_points_per_axis, config.grid_cap));
  validate_run_config(config, grid->size());
  CholeskyState initial = CholeskyState::init(config.kernel, grid);

  if (const auto* mv = std::get_if<LocalMaxVolStrategy>(&config.strategy)) {
    MaxVolResult found = local_maxvol(initial, config.n_max, mv->max_sweeps);
    RunResult result = replay_pivots(config, initial, found.pivot_indices, start);
    result.maxvol_converged = found.converged;
    if (static_cast<Index>(found.pivot_indices.size()) < config.n_max &&
        result.status == RunStatus::completed)
      result.status = RunStatus::breakdown;  // rank capped the set size
    return result;
  }

  RunResult result{initial, {}, RunStatus::completed, std::nullopt};
  const BoundContext ctx = make_context(config, initial);
  const double eta = grid->spacing();
  CoverageTracker tracker(grid);
  std::mt19937_64 rng(config.seed);
  CholeskyState state = initial;
  state.reserve(config.n_max);

  std::vector<Index> uniform_pivots;
  if (const auto* uni = std::get_if<UniformStrategy>(&config.strategy)) {
    // Snapping can collapse neighbours onto one grid point; keep first visits.
    for (Index idx : snap_to_grid(*grid, uni->pivot_points))
      if (std::find(uniform_pivots.begin(), uniform_pivots.end(), idx) ==
          uniform_pivots.end())
        uniform_pivots.push_back(idx);
    if (config.n_max > static_cast<Index>(uniform_pivots.size()))
      throw std::invalid_argument(
          "run: uniform pivot list is shorter than n_max");
  }

  for (Index n = 1; n <= config.n_max; ++n) {
    Index pivot;
    try {
      if (std::holds_alternative<CompleteStrategy>(config.strategy)) {
        pivot = select_complete(state);
      } else if (const auto* dc =
                     std::get_if<DeltaCompleteStrategy>(&config.strategy)) {
        pivot = select_delta_complete(state, dc->delta, rng);
      } else if (std::holds_alternative<RandomStrategy>(config.strategy)) {
        pivot = select_random(state, rng);
      } else {
        pivot = uniform_pivots[static_cast<std::size_t>(n - 1)];
        if (!(state.raw_diag()[pivot] > state.breakdown_tolerance()))
          throw BreakdownError("uniform pivot is numerically exhausted",
                               static_cast<long>(state.steps()));
      }
      state = state.stepped(pivot);
    } catch (const BreakdownError&) {
      result.status = RunStatus::breakdown;
      break;
    } catch (const NumericError&) {
      // An update at a pivot barely above the tolerance lost precision;
      // the factorization through the previous step stands.
      result.status = RunStatus::breakdown;
      break;
    }
    tracker.add_pivot(grid->point(pivot));
    result.records.push_back(
        make_record(n, state, tracker, ctx, eta, elapsed_ms(start)));
    if (config.stop_tolerance > 0.0 &&
        result.records.back().sup_residual < config.stop_tolerance) {
      result.status = RunStatus::converged;
      break;
    }
  }
  result.state = std::move(state);
  return result;
}

RunResult refine_grid_run(const RunConfig& config, double delta_target) {
  if (!(delta_target > 0.0) || !(delta_target < 1.0))
    throw std::invalid_argument("refine_grid_run: delta_target must be in (0,1)");
  if (!config.kernel.diag_lipschitz())
    throw std::invalid_argument(
        "refine_grid_run: kernel needs a certified diagonal-Lipschitz constant");
  const double diag_l = *config.kernel.diag_lipschitz();
  const auto start = Clock::now();

  int m = config.grid_points_per_axis;
  auto grid = std::make_shared<const CandidateGrid>(
      tensor_grid(config.domain, m, config.grid_cap));
  // n_max may exceed the initial grid: refinement grows it on demand.
  if (config.n_max < 1)
    throw std::invalid_argument("refine_grid_run: n_max must be >= 1");
  if (config.kernel.dim() != config.domain.dim())
    throw std::invalid_argument("refine_grid_run: dimension mismatch");
  CholeskyState state = CholeskyState::init(config.kernel, grid);
  const BoundContext ctx = make_context(config, state);
  CoverageTracker tracker(grid);
  std::vector<Index> pivots;

  RunResult result{state, {}, RunStatus::completed, std::nullopt};
  for (Index n = 1; n <= config.n_max; ++n) {
    // Maintain 4 L eta <= (1 - delta) * max diag by refining before the pick.
    while (true) {
      const double max_diag = state.max_diag().second;
      if (!(max_diag > state.breakdown_tolerance())) break;
      if (4.0 * diag_l * grid->spacing() <= (1.0 - delta_target) * max_diag)
        break;
      const int finer = 2 * m - 1;  // halves the spacing, keeps old points
      std::shared_ptr<const CandidateGrid> next_grid;
      try {
        next_grid = std::make_shared<const CandidateGrid>(
            tensor_grid(config.domain, finer, config.grid_cap));
      } catch (const ResourceError&) {
        result.status = RunStatus::grid_cap_reached;
        result.state = std::move(state);
        return result;
      }
      m = finer;
      Matrix held(grid->dim(), static_cast<Index>(pivots.size()));
      for (std::size_t i = 0; i < pivots.size(); ++i)
        held.col(static_cast<Index>(i)) = grid->point(pivots[i]);
      grid = next_grid;
      std::vector<Index> remapped = snap_to_grid(*grid, held);
      state = CholeskyState::init(config.kernel, grid);
      state.reserve(config.n_max);
      for (Index idx : remapped) state = state.stepped(idx);
      pivots = std::move(remapped);
      tracker = CoverageTracker(grid);
      for (Index idx : pivots) tracker.add_pivot(grid->point(idx));
    }

    Index pivot;
    try {
      pivot = select_complete(state);
      state = state.stepped(pivot);
    } catch (const BreakdownError&) {
      result.status = RunStatus::breakdown;
      break;
    } catch (const NumericError&) {
      result.status = RunStatus::breakdown;
      break;
    }
    pivots.push_back(pivot);
    tracker.add_pivot(grid->point(pivot));
    result.records.push_back(
        make_record(n, state, tracker, ctx, grid->spacing(), elapsed_ms(start)));
    if (config.stop_tolerance > 0.0 &&
        result.records.back().sup_residual < config.stop_tolerance) {
      result.status = RunStatus::converged;
      break;
    }
  }
  result.state = std::move(state);
  return result;
}

}  // namespace pchol
