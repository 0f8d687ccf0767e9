#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "pchol/geometry.hpp"
#include "pchol/kernel.hpp"

namespace pchol {

/// Relative slack used by every residual-diagonal argmax in the project:
/// the selected index is the lowest one whose value is within this relative
/// tolerance of the maximum. Mathematically tied values (symmetric pivot
/// configurations) then resolve to the same index regardless of which
/// algebraic route computed them.
inline constexpr double kArgmaxRelSlack = 1e-12;

/// Lowest index i with v[i] >= max(v) * (1 - kArgmaxRelSlack), paired with
/// the maximum itself.
std::pair<Index, double> slack_argmax(const Vector& v);

/// Incremental pivoted Cholesky factorization of a kernel restricted to a
/// candidate grid.
///
/// After n steps the rank-n approximant is sum_i c_i(x) c_i(y) with the
/// normalized columns c_i held on the grid, and the residual kernel is
/// K - that sum. The state keeps the residual diagonal cached on the grid;
/// it never materializes the residual as a matrix.
///
/// stepped() returns a new state; column storage is shared between a state
/// and its successors (appending step n+1 does not disturb readers of the
/// first n columns), and branching an older state copies the prefix. States
/// may be handed between threads, but two threads must not step states of
/// the same lineage concurrently.
class CholeskyState {
 public:
  static CholeskyState init(Kernel kernel,
                            std::shared_ptr<const CandidateGrid> grid);
  static CholeskyState init(Kernel kernel, CandidateGrid grid);

  Index steps() const { return n_; }
  const Kernel& kernel() const { return *kernel_; }
  const CandidateGrid& grid() const { return *grid_; }
  const std::shared_ptr<const CandidateGrid>& grid_ptr() const { return grid_; }

  /// Max of the initial diagonal; the scale for every tolerance.
  double kmax() const { return kmax_; }
  /// Pivots are accepted only while their residual diagonal exceeds this.
  double breakdown_tolerance() const { return 1e-12 * kmax_; }

  /// Residual diagonal at grid index i, with values in
  /// [-1e-12 kmax, 0) reported as 0.
  double diag(Index i) const { return diag_[i] < 0.0 ? 0.0 : diag_[i]; }
  /// Clamped copy of the whole residual diagonal.
  Vector diag_residual() const { return diag_.cwiseMax(0.0); }
  /// Unclamped cache (roundoff-negative entries included).
  const Vector& raw_diag() const { return diag_; }

  /// (index, value) of the residual-diagonal maximum; ties resolve to the
  /// lowest grid index (see slack_argmax).
  std::pair<Index, double> max_diag() const;

  /// max_{x,y} |R_n(x,y)| = max of the residual diagonal, because the
  /// residual is positive semidefinite and Cauchy-Schwarz bounds every
  /// off-diagonal entry by the diagonal.
  double residual_sup_norm() const;

  /// One rank-1 update pivoted at a grid index. Throws BreakdownError when
  /// the pivot's residual diagonal is at or below breakdown_tolerance(),
  /// std::invalid_argument for duplicate or out-of-range pivots, and
  /// NumericError if the update produces non-finite values or drives the
  /// diagonal below -1e-12 kmax.
  CholeskyState stepped(Index pivot_index) const;

  /// R_n(x,y) at arbitrary points of the domain. Off-grid column values are
  /// reconstructed by forward substitution through the pivot cross matrix.
  double residual_eval(ConstVecRef x, ConstVecRef y) const;

  Index pivot_index(Index i) const;
  Vector pivot_point(Index i) const;
  const std::vector<Index>& pivot_indices() const;
  /// d_i: the pivot's residual diagonal value at selection time.
  double pivot_value(Index i) const;
  PivotSet pivot_set() const;

  /// Lower-triangular n x n matrix with entry (i,j) = c_j(z_i), j <= i.
  Matrix cross_matrix() const;
  /// Grid-size x n block of normalized columns c_i.
  Eigen::Block<const Matrix> columns() const;

  /// Pre-size shared column storage for a known step budget.
  void reserve(Index n) const;

 private:
  struct Storage;
  CholeskyState() = default;

  std::shared_ptr<const Kernel> kernel_;
  std::shared_ptr<const CandidateGrid> grid_;
  std::shared_ptr<Storage> store_;
  Index n_ = 0;
  Vector diag_;
  double kmax_ = 0.0;
};

/// Runs the factorization once with the pivots in the given order and once
/// in the permuted order, and returns the max over the grid of the absolute
/// difference between the two residual diagonals. `permutation` maps
/// position -> position and must be a permutation of 0..n-1; when omitted
/// the order is reversed.
double order_invariance_deviation(const Kernel& kernel,
                                  std::shared_ptr<const CandidateGrid> grid,
                                  const std::vector<Index>& pivots,
                                  const std::vector<Index>& permutation);
double order_invariance_deviation(const Kernel& kernel,
                                  std::shared_ptr<const CandidateGrid> grid,
                                  const std::vector<Index>& pivots);

}  // namespace pchol
