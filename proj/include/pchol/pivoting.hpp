#pragma once

#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "pchol/cholesky.hpp"
#include "pchol/convergence.hpp"
#include "pchol/geometry.hpp"

namespace pchol {

// --- pivot selection strategies --------------------------------------------

struct CompleteStrategy {};

/// Accept any pivot whose residual diagonal is at least delta times the
/// current maximum; the choice among admissible indices is seeded-uniform.
struct DeltaCompleteStrategy {
  double delta;  // in (0, 1]
};

/// Predetermined pivot locations, visited in order. The points are snapped
/// to the candidate grid at run time.
struct UniformStrategy {
  Matrix pivot_points;  // dim x n, selection order
};

/// Seeded-uniform choice among all grid indices still above the breakdown
/// tolerance.
struct RandomStrategy {
  unsigned seed;
};

/// Pivot set of locally maximal Gram determinant: no single pivot can be
/// swapped for any grid point without decreasing the determinant.
struct LocalMaxVolStrategy {
  int max_sweeps;
};

using PivotStrategy = std::variant<CompleteStrategy, DeltaCompleteStrategy,
                                   UniformStrategy, RandomStrategy,
                                   LocalMaxVolStrategy>;

/// Tensor pivot locations (m per axis) for the uniform strategy.
UniformStrategy uniform_tensor_pivots(const Domain& domain, int points_per_axis);

/// Grid index of the residual-diagonal maximum (lowest-index tie-break).
/// Throws BreakdownError when the maximum is at or below the tolerance.
Index select_complete(const CholeskyState& state);

/// Seeded-uniform choice among indices with diagonal >= delta * maximum
/// (and above the breakdown tolerance).
Index select_delta_complete(const CholeskyState& state, double delta,
                            std::mt19937_64& rng);
Index select_delta_complete(const CholeskyState& state, double delta,
                            unsigned seed);

/// Seeded-uniform choice among indices above the breakdown tolerance.
Index select_random(const CholeskyState& state, std::mt19937_64& rng);

struct MaxVolResult {
  std::vector<Index> pivot_indices;
  bool converged = false;
  int sweeps_used = 0;
};

/// Local maximum-volume pivot search over the grid, initialized from the
/// complete-pivoting set of size n. Each sweep tests, for every held pivot,
/// whether replacing it by any grid point enlarges the Gram determinant
/// (equivalently: whether the leave-one-out residual diagonal peaks away
/// from the held pivot), and swaps when it does. Terminates at a sweep with
/// no swaps, or returns the current set flagged non-converged once
/// max_sweeps is exhausted.
MaxVolResult local_maxvol(const CholeskyState& initial, Index n, int max_sweeps);

// --- the run driver ---------------------------------------------------------

struct RunConfig {
  Kernel kernel;
  Domain domain;
  int grid_points_per_axis = 0;
  PivotStrategy strategy = CompleteStrategy{};
  Index n_max = 0;
  double stop_tolerance = 0.0;
  unsigned seed = 0;
  Index grid_cap = kDefaultGridCap;
};

enum class RunStatus {
  completed,        // n_max steps taken
  converged,        // residual fell below stop_tolerance
  breakdown,        // no admissible pivot remained; records are partial
  grid_cap_reached  // refinement hit the grid cap; records are partial
};

struct RunResult {
  CholeskyState state;
  std::vector<ConvergenceRecord> records;
  RunStatus status = RunStatus::completed;
  std::optional<bool> maxvol_converged;  // set only for the max-vol strategy
};

/// Executes up to n_max steps (or until the sup norm drops below
/// stop_tolerance), recording one ConvergenceRecord per step. Fill distance
/// and minimum separation are maintained incrementally and match the batch
/// geometry operations exactly.
RunResult run(const RunConfig& config);

/// Complete pivoting on a grid that is refined (points per axis m -> 2m-1,
/// halving the spacing) whenever 4 L eta exceeds (1 - delta_target) times
/// the current diagonal maximum, so every grid pick is guaranteed to be a
/// delta_target-quality pivot. Refinement re-factorizes the held pivots on
/// the finer grid; records carry the grid size in force at each step.
/// Requires a certified diagonal-Lipschitz constant.
RunResult refine_grid_run(const RunConfig& config, double delta_target);

}  // namespace pchol
