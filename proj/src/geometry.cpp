#include "pchol/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "pchol/errors.hpp"

namespace pchol {

Domain::Domain(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.size() < 1)
    throw std::invalid_argument("domain bounds must share a dimension >= 1");
  for (Index j = 0; j < lower_.size(); ++j)
    if (!(lower_[j] < upper_[j]))
      throw std::invalid_argument("domain requires lower < upper per axis");
}

CandidateGrid::CandidateGrid(Matrix points, double spacing, int points_per_axis)
    : points_(std::move(points)),
      spacing_(spacing),
      points_per_axis_(points_per_axis) {
  if (points_.cols() < 1)
    throw std::invalid_argument("candidate grid must be nonempty");
  if (!(spacing_ >= 0.0))
    throw std::invalid_argument("grid spacing must be >= 0");
}

CandidateGrid tensor_grid(const Domain& domain, int points_per_axis,
                          Index max_points) {
  if (points_per_axis < 2)
    throw std::invalid_argument("tensor_grid: points_per_axis must be >= 2");
  const int d = domain.dim();
  double total_d = std::pow(static_cast<double>(points_per_axis), d);
  if (total_d > static_cast<double>(max_points))
    throw ResourceError("tensor_grid: " + std::to_string(points_per_axis) +
                        "^" + std::to_string(d) + " points exceeds the cap of " +
                        std::to_string(max_points));
  const Index m = points_per_axis;
  Index total = 1;
  for (int a = 0; a < d; ++a) total *= m;

  Vector step(d);
  for (int a = 0; a < d; ++a)
    step[a] = (domain.upper()[a] - domain.lower()[a]) / static_cast<double>(m - 1);

  Matrix pts(d, total);
  for (Index i = 0; i < total; ++i) {
    Index rem = i;
    for (int a = 0; a < d; ++a) {
      const Index ia = rem % m;
      rem /= m;
      pts(a, i) = domain.lower()[a] + static_cast<double>(ia) * step[a];
    }
  }
  const double spacing = 0.5 * step.norm();
  return CandidateGrid(std::move(pts), spacing, points_per_axis);
}

double fill_distance(const PivotSet& pivots, const CandidateGrid& grid) {
  if (pivots.size() < 1)
    throw std::invalid_argument("fill_distance: pivot set must be nonempty");
  if (pivots.points.rows() != grid.dim())
    throw std::invalid_argument("fill_distance: dimension mismatch");
  double worst = 0.0;
  for (Index i = 0; i < grid.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Index p = 0; p < pivots.size(); ++p) {
      const double dist = (grid.point(i) - pivots.point(p)).norm();
      if (dist < nearest) nearest = dist;
    }
    if (nearest > worst) worst = nearest;
  }
  return worst;
}

double min_separation(const PivotSet& pivots) {
  const Index n = pivots.size();
  if (n < 2)
    throw std::invalid_argument("min_separation: need at least 2 pivots");
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double dist = (pivots.point(i) - pivots.point(j)).norm();
      if (dist < best) best = dist;
    }
  if (best == 0.0)
    throw std::invalid_argument("min_separation: duplicate pivots");
  return best;
}

double packing_bound(const Domain& domain, Index n) {
  if (n <= 1) throw std::invalid_argument("packing_bound: requires n > 1");
  const double root =
      std::pow(static_cast<double>(n), 1.0 / static_cast<double>(domain.dim()));
  return 2.0 * domain.radius() / (root - 1.0);
}

std::vector<Index> snap_to_grid(const CandidateGrid& grid, const Matrix& points) {
  if (points.rows() != grid.dim())
    throw std::invalid_argument("snap_to_grid: dimension mismatch");
  std::vector<Index> out(points.cols());
  for (Index p = 0; p < points.cols(); ++p) {
    Index best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < grid.size(); ++i) {
      const double dist = (grid.point(i) - points.col(p)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    out[p] = best;
  }
  return out;
}

CoverageTracker::CoverageTracker(std::shared_ptr<const CandidateGrid> grid)
    : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("CoverageTracker: null grid");
  nearest_ =
      Vector::Constant(grid_->size(), std::numeric_limits<double>::infinity());
  pivots_.resize(grid_->dim(), 0);
}

void CoverageTracker::add_pivot(ConstVecRef z) {
  if (z.size() != grid_->dim())
    throw std::invalid_argument("CoverageTracker: pivot dimension mismatch");
  for (Index p = 0; p < pivots_.cols(); ++p) {
    const double dist = (pivots_.col(p) - z).norm();
    if (dist < min_sep_) min_sep_ = dist;
  }
  pivots_.conservativeResize(Eigen::NoChange, pivots_.cols() + 1);
  pivots_.col(pivots_.cols() - 1) = z;
  for (Index i = 0; i < grid_->size(); ++i) {
    const double dist = (grid_->point(i) - z).norm();
    if (dist < nearest_[i]) nearest_[i] = dist;
  }
}

double CoverageTracker::fill_distance() const {
  if (pivots_.cols() < 1)
    throw std::invalid_argument("CoverageTracker: no pivots yet");
  return nearest_.maxCoeff();
}

}  // namespace pchol
