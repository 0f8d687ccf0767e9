#include "pchol/cholesky.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pchol/errors.hpp"

namespace pchol {

struct CholeskyState::Storage {
  Matrix columns;                    // grid size x capacity
  Matrix cross;                      // capacity x capacity, lower triangle
  std::vector<Index> pivot_indices;  // grid index per step
  std::vector<double> pivot_values;  // d_i per step
  Index count = 0;

  void ensure_capacity(Index n, Index grid_size) {
    if (columns.cols() >= n) return;
    Index cap = std::max<Index>(16, columns.cols());
    while (cap < n) cap *= 2;
    columns.conservativeResize(grid_size, cap);
    cross.conservativeResize(cap, cap);
  }

  std::shared_ptr<Storage> clone_prefix(Index n, Index grid_size) const {
    auto copy = std::make_shared<Storage>();
    copy->ensure_capacity(std::max<Index>(n, 16), grid_size);
    if (n > 0) {
      copy->columns.leftCols(n) = columns.leftCols(n);
      copy->cross.topLeftCorner(n, n) = cross.topLeftCorner(n, n);
    }
    copy->pivot_indices.assign(pivot_indices.begin(), pivot_indices.begin() + n);
    copy->pivot_values.assign(pivot_values.begin(), pivot_values.begin() + n);
    copy->count = n;
    return copy;
  }
};

std::pair<Index, double> slack_argmax(const Vector& v) {
  const double top = v.maxCoeff();
  const double cutoff = top - std::abs(top) * kArgmaxRelSlack;
  for (Index i = 0; i < v.size(); ++i)
    if (v[i] >= cutoff) return {i, top};
  return {0, top};  // unreachable for nonempty v
}

CholeskyState CholeskyState::init(Kernel kernel,
                                  std::shared_ptr<const CandidateGrid> grid) {
  if (!grid || grid->size() < 1)
    throw std::invalid_argument("CholeskyState: grid must be nonempty");
  if (kernel.dim() != grid->dim())
    throw std::invalid_argument("CholeskyState: kernel/grid dimension mismatch");

  CholeskyState state;
  state.kernel_ = std::make_shared<Kernel>(std::move(kernel));
  state.grid_ = std::move(grid);
  state.store_ = std::make_shared<Storage>();
  state.diag_.resize(state.grid_->size());
  for (Index i = 0; i < state.grid_->size(); ++i) {
    const double v = (*state.kernel_)(state.grid_->point(i), state.grid_->point(i));
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "kernel '" << state.kernel_->name()
          << "' is non-finite on the diagonal at grid point [";
      for (int a = 0; a < state.grid_->dim(); ++a)
        msg << (a ? ", " : "") << state.grid_->point(i)[a];
      msg << "]";
      throw NumericError(msg.str());
    }
    state.diag_[i] = v;
  }
  state.kmax_ = state.diag_.maxCoeff();
  return state;
}

CholeskyState CholeskyState::init(Kernel kernel, CandidateGrid grid) {
  return init(std::move(kernel),
              std::make_shared<const CandidateGrid>(std::move(grid)));
}

std::pair<Index, double> CholeskyState::max_diag() const {
  // The reported value is the selected entry's own (it can sit a relative
  // kArgmaxRelSlack below the sweep maximum when ties resolve downward).
  const auto [idx, top] = slack_argmax(diag_);
  (void)top;
  return {idx, std::max(diag_[idx], 0.0)};
}

double CholeskyState::residual_sup_norm() const {
  return std::max(diag_.maxCoeff(), 0.0);
}

CholeskyState CholeskyState::stepped(Index pivot_index) const {
  const Index N = grid_->size();
  if (pivot_index < 0 || pivot_index >= N)
    throw std::invalid_argument("stepped: pivot index out of range");
  for (Index i = 0; i < n_; ++i)
    if (store_->pivot_indices[i] == pivot_index)
      throw std::invalid_argument("stepped: pivot already selected");
  const double d = diag_[pivot_index];
  if (!(d > breakdown_tolerance()))
    throw BreakdownError("pivot diagonal " + std::to_string(d) +
                             " at grid index " + std::to_string(pivot_index) +
                             " is at or below the breakdown tolerance",
                         static_cast<long>(n_));

  CholeskyState next = *this;
  if (store_->count != n_)  // branched lineage: detach a private prefix copy
    next.store_ = store_->clone_prefix(n_, N);
  Storage& st = *next.store_;
  st.ensure_capacity(n_ + 1, N);

  auto col = st.columns.col(n_);
  const auto z = grid_->point(pivot_index);
  for (Index i = 0; i < N; ++i) col[i] = (*kernel_)(grid_->point(i), z);
  if (n_ > 0)
    col.noalias() -=
        st.columns.leftCols(n_) * st.columns.row(pivot_index).head(n_).transpose();
  col /= std::sqrt(d);
  if (!col.allFinite())
    throw NumericError("stepped: non-finite column values at step " +
                       std::to_string(n_ + 1));

  next.diag_.array() -= col.array().square();
  const double floor = -1e-12 * kmax_;
  if (next.diag_.minCoeff() < floor)
    throw NumericError("stepped: residual diagonal fell below the roundoff "
                       "floor at step " +
                       std::to_string(n_ + 1));

  st.cross.row(n_).head(n_ + 1) =
      st.columns.block(pivot_index, 0, 1, n_ + 1);
  st.pivot_indices.push_back(pivot_index);
  st.pivot_values.push_back(d);
  st.count = n_ + 1;
  next.n_ = n_ + 1;
  return next;
}

double CholeskyState::residual_eval(ConstVecRef x, ConstVecRef y) const {
  const double kxy = (*kernel_)(x, y);
  if (!std::isfinite(kxy)) throw NumericError("residual_eval: non-finite kernel value");
  if (n_ == 0) return kxy;

  auto substitute = [&](ConstVecRef p) {
    Vector rhs(n_);
    for (Index i = 0; i < n_; ++i) rhs[i] = (*kernel_)(p, pivot_point(i));
    // Forward substitution through the cross matrix reproduces the column
    // recursion c_i(p) = (K(p,z_i) - sum_{j<i} c_j(p) c_j(z_i)) / sqrt(d_i).
    Vector c(n_);
    for (Index i = 0; i < n_; ++i) {
      double acc = rhs[i];
      for (Index j = 0; j < i; ++j) acc -= c[j] * store_->cross(i, j);
      c[i] = acc / store_->cross(i, i);
    }
    return c;
  };

  const Vector cx = substitute(x);
  const Vector cy = substitute(y);
  return kxy - cx.dot(cy);
}

Index CholeskyState::pivot_index(Index i) const {
  if (i < 0 || i >= n_) throw std::invalid_argument("pivot_index: out of range");
  return store_->pivot_indices[i];
}

Vector CholeskyState::pivot_point(Index i) const {
  return grid_->point(pivot_index(i));
}

const std::vector<Index>& CholeskyState::pivot_indices() const {
  // The shared vector may be longer than n_ on a branched lineage; expose it
  // only when this state owns the full prefix.
  static const std::vector<Index> empty;
  if (n_ == 0) return empty;
  if (store_->count != n_)
    throw std::logic_error("pivot_indices: state does not own the storage tail");
  return store_->pivot_indices;
}

double CholeskyState::pivot_value(Index i) const {
  if (i < 0 || i >= n_) throw std::invalid_argument("pivot_value: out of range");
  return store_->pivot_values[i];
}

PivotSet CholeskyState::pivot_set() const {
  Matrix pts(grid_->dim(), n_);
  for (Index i = 0; i < n_; ++i) pts.col(i) = pivot_point(i);
  return PivotSet{std::move(pts)};
}

Matrix CholeskyState::cross_matrix() const {
  Matrix t = Matrix::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i)
    t.row(i).head(i + 1) = store_->cross.row(i).head(i + 1);
  return t;
}

Eigen::Block<const Matrix> CholeskyState::columns() const {
  const Matrix& cols = store_->columns;
  return cols.topLeftCorner(grid_->size(), n_);
}

void CholeskyState::reserve(Index n) const {
  store_->ensure_capacity(n, grid_->size());
}

namespace {

Vector factorized_diag(const Kernel& kernel,
                       const std::shared_ptr<const CandidateGrid>& grid,
                       const std::vector<Index>& pivots) {
  CholeskyState state = CholeskyState::init(kernel, grid);
  state.reserve(static_cast<Index>(pivots.size()));
  for (Index p : pivots) state = state.stepped(p);
  return state.raw_diag();
}

}  // namespace

double order_invariance_deviation(const Kernel& kernel,
                                  std::shared_ptr<const CandidateGrid> grid,
                                  const std::vector<Index>& pivots,
                                  const std::vector<Index>& permutation) {
  if (permutation.size() != pivots.size())
    throw std::invalid_argument("order_invariance_deviation: permutation size");
  std::vector<Index> seen(pivots.size(), 0);
  std::vector<Index> permuted(pivots.size());
  for (std::size_t i = 0; i < permutation.size(); ++i) {
    const Index p = permutation[i];
    if (p < 0 || p >= static_cast<Index>(pivots.size()) || seen[p]++)
      throw std::invalid_argument("order_invariance_deviation: not a permutation");
    permuted[i] = pivots[p];
  }
  const Vector a = factorized_diag(kernel, grid, pivots);
  const Vector b = factorized_diag(kernel, grid, permuted);
  return (a - b).cwiseAbs().maxCoeff();
}

double order_invariance_deviation(const Kernel& kernel,
                                  std::shared_ptr<const CandidateGrid> grid,
                                  const std::vector<Index>& pivots) {
  std::vector<Index> reversed(pivots.size());
  for (std::size_t i = 0; i < pivots.size(); ++i)
    reversed[i] = static_cast<Index>(pivots.size() - 1 - i);
  return order_invariance_deviation(kernel, std::move(grid), pivots, reversed);
}

}  // namespace pchol
