#include "pchol/matrix.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <istream>
#include <stdexcept>

#include "pchol/cholesky.hpp"
#include "pchol/errors.hpp"

namespace pchol {

SpdMatrix SpdMatrix::validated(Matrix entries) {
  if (entries.rows() != entries.cols() || entries.rows() < 1)
    throw std::invalid_argument("SpdMatrix: entries must be square and nonempty");
  const double scale = entries.cwiseAbs().maxCoeff();
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1e-300))
    throw std::invalid_argument("SpdMatrix: not symmetric within tolerance");
  Eigen::SelfAdjointEigenSolver<Matrix> es(entries, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericError("SpdMatrix: eigenvalue validation failed to converge");
  const double eig_min = es.eigenvalues().minCoeff();
  const double trace = entries.trace();
  if (eig_min < -1e-10 * std::abs(trace))
    throw std::invalid_argument("SpdMatrix: smallest eigenvalue " +
                                std::to_string(eig_min) +
                                " is below -1e-10 * trace");
  return SpdMatrix(std::move(entries));
}

SpdMatrix SpdMatrix::unchecked(Matrix entries) {
  if (entries.rows() != entries.cols() || entries.rows() < 1)
    throw std::invalid_argument("SpdMatrix: entries must be square and nonempty");
  return SpdMatrix(std::move(entries));
}

double discrete_lipschitz(const SpdMatrix& a) {
  const Index m = a.order();
  if (m < 2) throw std::invalid_argument("discrete_lipschitz: order must be >= 2");
  double best = 0.0;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      if (i == j) continue;
      const double quot =
          std::abs(a(i, i) - a(i, j)) / static_cast<double>(std::abs(i - j));
      if (quot > best) best = quot;
    }
  return best;
}

MatrixFactorization matrix_pivoted_cholesky(const SpdMatrix& a, Index n) {
  const Index m = a.order();
  if (n < 1 || n > m)
    throw std::invalid_argument("matrix_pivoted_cholesky: need 1 <= n <= m");

  MatrixFactorization f;
  f.factor.resize(m, n);
  f.residual_diag = a.entries().diagonal();
  const double tol = 1e-12 * f.residual_diag.maxCoeff();

  for (Index k = 0; k < n; ++k) {
    const auto [pivot, value] = slack_argmax(f.residual_diag);
    if (!(value > tol)) {
      f.factor.conservativeResize(Eigen::NoChange, k);
      throw BreakdownError(
          "matrix_pivoted_cholesky: breakdown after " + std::to_string(k) +
              " steps (pivot diagonal " + std::to_string(value) + ")",
          static_cast<long>(k));
    }
    auto col = f.factor.col(k);
    col = a.entries().col(pivot);
    if (k > 0)
      col.noalias() -=
          f.factor.leftCols(k) * f.factor.row(pivot).head(k).transpose();
    col /= std::sqrt(f.residual_diag[pivot]);
    f.residual_diag.array() -= col.array().square();
    f.pivots.push_back(pivot);
  }
  return f;
}

double residual_max_entry(const MatrixFactorization& f, const SpdMatrix& a,
                          Index upto) {
  if (upto < 0) upto = f.steps();
  if (upto > f.steps())
    throw std::invalid_argument("residual_max_entry: upto exceeds the factor");
  if (upto == 0) return a.max_abs();
  const auto l = f.factor.leftCols(upto);
  return (a.entries() - l * l.transpose()).cwiseAbs().maxCoeff();
}

SpdMatrix read_matrix(std::istream& in) {
  Index m = 0;
  if (!(in >> m) || m < 1)
    throw std::invalid_argument("read_matrix: bad or missing order line");
  Matrix entries(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      if (!(in >> entries(i, j)))
        throw std::invalid_argument("read_matrix: truncated entry at row " +
                                    std::to_string(i));
  return SpdMatrix::validated(std::move(entries));
}

}  // namespace pchol
