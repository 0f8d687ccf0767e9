#pragma once

#include <iosfwd>
#include <vector>

#include "pchol/kernel.hpp"

namespace pchol {

/// Dense SPD matrix validated on construction: symmetry within 1e-12
/// relative and smallest eigenvalue >= -1e-10 * trace. The eigenvalue check
/// runs a full symmetric solve and is meant for desk-scale orders; use
/// unchecked() to skip it.
class SpdMatrix {
 public:
  static SpdMatrix validated(Matrix entries);
  static SpdMatrix unchecked(Matrix entries);

  Index order() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }
  double operator()(Index i, Index j) const { return entries_(i, j); }
  double max_abs() const { return entries_.cwiseAbs().maxCoeff(); }

 private:
  explicit SpdMatrix(Matrix entries) : entries_(std::move(entries)) {}
  Matrix entries_;
};

/// max over i != j of |A_ii - A_ij| / |i - j|: how fast entries drift from
/// the diagonal along a row, per unit of index distance. Requires order >= 2.
double discrete_lipschitz(const SpdMatrix& a);

/// Complete-pivoting Cholesky factor after n steps. The rank-n approximant
/// is factor * factor^T.
struct MatrixFactorization {
  std::vector<Index> pivots;
  Matrix factor;        // m x n
  Vector residual_diag; // diagonal of A - factor factor^T
  Index steps() const { return factor.cols(); }
};

/// n steps of complete-pivoting Cholesky on A. Tie-breaking and breakdown
/// behavior match the kernel factorization (lowest admissible index, pivot
/// accepted while its residual diagonal exceeds 1e-12 * max initial
/// diagonal). Throws BreakdownError carrying the number of completed steps.
MatrixFactorization matrix_pivoted_cholesky(const SpdMatrix& a, Index n);

/// max_ij |A - A_k| for the rank-k approximant built from the first k
/// factor columns (k = upto, defaulting to every completed step; upto = 0
/// gives ||A||_max).
double residual_max_entry(const MatrixFactorization& f, const SpdMatrix& a,
                          Index upto = -1);

/// Plain-text dense format: first line the order m, then m rows of m
/// space-separated decimals. Validation as in SpdMatrix::validated.
SpdMatrix read_matrix(std::istream& in);

}  // namespace pchol
