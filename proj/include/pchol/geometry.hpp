#pragma once

#include <Eigen/Core>
#include <limits>
#include <memory>
#include <vector>

#include "pchol/kernel.hpp"

namespace pchol {

/// Axis-aligned box in R^d. radius() is the radius of the smallest ball
/// centered at the box center that contains it (half the box diagonal).
class Domain {
 public:
  Domain(Vector lower, Vector upper);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Vector center() const { return 0.5 * (lower_ + upper_); }
  double radius() const { return 0.5 * (upper_ - lower_).norm(); }

 private:
  Vector lower_, upper_;
};

/// A finite candidate set covering the domain: every point of the box lies
/// within spacing() of some grid point. Points are ordered row-major with
/// the lowest axis varying fastest, which fixes tie-breaking everywhere
/// downstream.
class CandidateGrid {
 public:
  CandidateGrid(Matrix points, double spacing, int points_per_axis = 0);

  Index size() const { return points_.cols(); }
  int dim() const { return static_cast<int>(points_.rows()); }
  const Matrix& points() const { return points_; }
  Eigen::Ref<const Vector> point(Index i) const { return points_.col(i); }
  double spacing() const { return spacing_; }
  int points_per_axis() const { return points_per_axis_; }

 private:
  Matrix points_;  // dim x N, one point per column
  double spacing_;
  int points_per_axis_;
};

/// Ordered pivot locations (selection order), one point per column.
struct PivotSet {
  Matrix points;
  Index size() const { return points.cols(); }
  Eigen::Ref<const Vector> point(Index i) const { return points.col(i); }
};

inline constexpr Index kDefaultGridCap = 2'000'000;

/// Endpoint-inclusive uniform tensor grid with m points per axis (m^d
/// total). Spacing is half the cell diagonal, computed from the actual cell
/// widths. Throws ResourceError when m^d exceeds max_points.
CandidateGrid tensor_grid(const Domain& domain, int points_per_axis,
                          Index max_points = kDefaultGridCap);

/// Grid approximation of the fill distance sup_x min_i ||x - z_i||: the max
/// over grid points of the distance to the nearest pivot. This is a lower
/// bound on the true fill distance; the truth is at most the returned value
/// plus the grid spacing.
double fill_distance(const PivotSet& pivots, const CandidateGrid& grid);

/// Minimum pairwise distance among the pivots, by exhaustive scan.
/// Throws std::invalid_argument for fewer than 2 pivots or duplicates.
double min_separation(const PivotSet& pivots);

/// 2R/(n^{1/d} - 1): after n steps of complete pivoting some two pivots are
/// guaranteed to be at most this far apart. Requires n > 1.
double packing_bound(const Domain& domain, Index n);

/// Nearest grid index for each query point (ties to the lower index).
std::vector<Index> snap_to_grid(const CandidateGrid& grid, const Matrix& points);

/// Incremental companion to fill_distance / min_separation for drivers that
/// append one pivot at a time: add_pivot is O(grid size), and the reported
/// values match the batch operations exactly.
class CoverageTracker {
 public:
  explicit CoverageTracker(std::shared_ptr<const CandidateGrid> grid);

  void add_pivot(ConstVecRef z);
  Index pivot_count() const { return static_cast<Index>(pivots_.cols()); }
  double fill_distance() const;
  double min_separation() const {
    return pivot_count() < 2 ? std::numeric_limits<double>::infinity()
                             : min_sep_;
  }

 private:
  std::shared_ptr<const CandidateGrid> grid_;
  Vector nearest_;  // per grid point, distance to the nearest pivot so far
  Matrix pivots_;
  double min_sep_ = std::numeric_limits<double>::infinity();
};

}  // namespace pchol
