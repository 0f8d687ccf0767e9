#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pchol/errors.hpp"
#include "pchol/geometry.hpp"

using namespace pchol;

namespace {

Domain unit_interval() {
  Vector lo(1), hi(1);
  lo << 0.0;
  hi << 1.0;
  return Domain(lo, hi);
}

Domain sym_box(int d) {
  Vector lo = Vector::Constant(d, -1.0);
  Vector hi = Vector::Constant(d, 1.0);
  return Domain(lo, hi);
}

PivotSet pivots_1d(std::initializer_list<double> xs) {
  Matrix pts(1, static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) pts(0, i++) = x;
  return PivotSet{pts};
}

}  // namespace

TEST_CASE("domain radius and validation") {
  CHECK(sym_box(1).radius() == doctest::Approx(1.0));
  CHECK(sym_box(2).radius() == doctest::Approx(std::sqrt(2.0)));
  Vector lo(2), hi(2);
  lo << 0.0, 0.0;
  hi << 1.0, 0.0;
  CHECK_THROWS_AS(Domain(lo, hi), std::invalid_argument);
}

TEST_CASE("tensor grids: points, order, spacing") {
  const CandidateGrid g1 = tensor_grid(unit_interval(), 3);
  REQUIRE(g1.size() == 3);
  CHECK(g1.point(0)[0] == 0.0);
  CHECK(g1.point(1)[0] == 0.5);
  CHECK(g1.point(2)[0] == 1.0);
  CHECK(g1.spacing() == doctest::Approx(0.25));

  Vector lo(2), hi(2);
  lo << 0.0, 0.0;
  hi << 1.0, 1.0;
  const CandidateGrid g2 = tensor_grid(Domain(lo, hi), 2);
  REQUIRE(g2.size() == 4);
  // Row-major, lowest axis fastest.
  CHECK(g2.point(1)[0] == 1.0);
  CHECK(g2.point(1)[1] == 0.0);
  CHECK(g2.point(2)[0] == 0.0);
  CHECK(g2.point(2)[1] == 1.0);
  // Four corners leave the center sqrt(2)/2 from every grid point; the
  // half-cell-diagonal spacing must report that covering radius.
  CHECK(g2.spacing() == doctest::Approx(std::sqrt(2.0) / 2.0));

  const CandidateGrid g5 = tensor_grid(sym_box(1), 5);
  CHECK(g5.point(1)[0] == -0.5);
  CHECK(g5.spacing() == doctest::Approx(0.25));

  // Pairwise distinct by construction.
  for (Index i = 0; i < g2.size(); ++i)
    for (Index j = i + 1; j < g2.size(); ++j)
      CHECK((g2.point(i) - g2.point(j)).norm() > 0.0);

  CHECK_THROWS_AS(tensor_grid(sym_box(1), 1), std::invalid_argument);
  CHECK_THROWS_AS(tensor_grid(sym_box(3), 200), ResourceError);
  // Spacing formula for [0,1]^d endpoint-inclusive grids.
  const CandidateGrid g3 = tensor_grid(Domain(lo, hi), 11);
  CHECK(g3.spacing() ==
        doctest::Approx(std::sqrt(2.0) / (2.0 * 10.0)).epsilon(1e-15));
}

TEST_CASE("fill distance on grids") {
  const CandidateGrid grid = tensor_grid(unit_interval(), 101);
  CHECK(fill_distance(pivots_1d({0.5}), grid) == doctest::Approx(0.5));
  CHECK(fill_distance(pivots_1d({0.0, 1.0}), grid) == doctest::Approx(0.5));
  PivotSet everything{grid.points()};
  CHECK(fill_distance(everything, grid) == 0.0);
  CHECK_THROWS_AS(fill_distance(PivotSet{Matrix(1, 0)}, grid),
                  std::invalid_argument);
}

TEST_CASE("min separation") {
  CHECK(min_separation(pivots_1d({0.0, 0.3, 1.0})) == doctest::Approx(0.3));
  CHECK_THROWS_AS(min_separation(pivots_1d({0.0})), std::invalid_argument);
  CHECK_THROWS_AS(min_separation(pivots_1d({0.0, 0.0})), std::invalid_argument);

  // Independent O(n^2) regeneration on random points.
  std::mt19937_64 rng(3);
  Vector lo = Vector::Constant(2, -1.0), hi = Vector::Constant(2, 1.0);
  Matrix pts(2, 9);
  for (Index i = 0; i < 9; ++i) pts.col(i) = oracles::random_point(lo, hi, rng);
  double brute = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < 9; ++i)
    for (Index j = 0; j < 9; ++j)
      if (i != j) brute = std::min(brute, (pts.col(i) - pts.col(j)).norm());
  CHECK(min_separation(PivotSet{pts}) == brute);
}

TEST_CASE("packing bound arithmetic") {
  CHECK(packing_bound(sym_box(1), 2) == doctest::Approx(2.0));
  CHECK(packing_bound(sym_box(1), 101) == doctest::Approx(0.02));
  Vector lo(2), hi(2);
  // radius 1 box in 2-d: half diagonal 1 means side sqrt(2).
  lo << 0.0, 0.0;
  hi << std::sqrt(2.0), std::sqrt(2.0);
  CHECK(packing_bound(Domain(lo, hi), 9) == doctest::Approx(1.0));
  CHECK_THROWS_AS(packing_bound(sym_box(1), 1), std::invalid_argument);
}

TEST_CASE("coverage tracker reproduces the batch operations exactly") {
  std::mt19937_64 rng(17);
  auto grid =
      std::make_shared<const CandidateGrid>(tensor_grid(sym_box(2), 21));
  CoverageTracker tracker(grid);
  Matrix chosen(2, 0);
  Vector lo = Vector::Constant(2, -1.0), hi = Vector::Constant(2, 1.0);
  for (int k = 0; k < 12; ++k) {
    const Vector z = oracles::random_point(lo, hi, rng);
    tracker.add_pivot(z);
    chosen.conservativeResize(Eigen::NoChange, chosen.cols() + 1);
    chosen.col(chosen.cols() - 1) = z;
    const PivotSet set{chosen};
    CHECK(tracker.fill_distance() == fill_distance(set, *grid));
    if (k >= 1) CHECK(tracker.min_separation() == min_separation(set));
    else CHECK(std::isinf(tracker.min_separation()));
  }
}

TEST_CASE("fill and separation are nonincreasing as pivots accumulate") {
  std::mt19937_64 rng(29);
  auto grid =
      std::make_shared<const CandidateGrid>(tensor_grid(sym_box(1), 301));
  CoverageTracker tracker(grid);
  Vector lo = Vector::Constant(1, -1.0), hi = Vector::Constant(1, 1.0);
  double prev_fill = std::numeric_limits<double>::infinity();
  double prev_sep = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 40; ++k) {
    tracker.add_pivot(oracles::random_point(lo, hi, rng));
    CHECK(tracker.fill_distance() <= prev_fill);
    CHECK(tracker.min_separation() <= prev_sep);
    prev_fill = tracker.fill_distance();
    prev_sep = tracker.min_separation();
  }
}

TEST_CASE("tensor pivots meet the uniform fill guarantee") {
  // m points per axis on [0,1]^d: fill over the whole box is at most
  // sqrt(d)/(2(m-1)); the value measured on a finer candidate grid can only
  // be smaller.
  for (int d = 1; d <= 2; ++d) {
    Vector lo = Vector::Constant(d, 0.0), hi = Vector::Constant(d, 1.0);
    const Domain box(lo, hi);
    const CandidateGrid fine = tensor_grid(box, d == 1 ? 401 : 41);
    const int m = 5;
    const CandidateGrid coarse = tensor_grid(box, m);
    const PivotSet tensor_pivots{coarse.points()};
    const double fill = fill_distance(tensor_pivots, fine);
    CHECK(fill <= std::sqrt(static_cast<double>(d)) / (2.0 * (m - 1)) + 1e-15);
  }
}

TEST_CASE("snap to grid hits exact members") {
  const CandidateGrid grid = tensor_grid(sym_box(1), 5);
  Matrix query(1, 3);
  query << -0.49, 0.5, 0.9;
  const auto idx = snap_to_grid(grid, query);
  CHECK(grid.point(idx[0])[0] == -0.5);
  CHECK(grid.point(idx[1])[0] == 0.5);
  CHECK(grid.point(idx[2])[0] == 1.0);
}
