#pragma once

#include <Eigen/Cholesky>
#include <functional>
#include <vector>

#include "pchol/geometry.hpp"
#include "pchol/kernel.hpp"

namespace pchol {

/// Noise-free Gaussian-process posterior conditioned on observations at the
/// given sites. Gram solves go through a dense symmetric LDL^T
/// factorization, a route deliberately separate from the incremental
/// Cholesky columns so the two can check each other.
///
/// jitter adds tau^2 to the Gram diagonal as a numerical rescue; it defaults
/// to 0 and must stay 0 wherever exact-identity behavior is asserted.
class GpPosterior {
 public:
  using MeanFn = std::function<double(ConstVecRef)>;

  GpPosterior(Kernel kernel, Matrix sites, Vector values,
              MeanFn prior_mean = nullptr, double jitter = 0.0);

  Index site_count() const { return sites_.cols(); }
  const Matrix& sites() const { return sites_; }

  double mean(ConstVecRef x) const;
  double cov(ConstVecRef x, ConstVecRef y) const;
  double variance(ConstVecRef x) const { return cov(x, x); }

 private:
  Vector cross_vector(ConstVecRef x) const;

  Kernel kernel_;
  Matrix sites_;
  Vector values_;
  MeanFn prior_mean_;
  Eigen::LDLT<Matrix> gram_;
  Vector weights_;  // Gram^{-1} (y - mean(sites))
};

/// Worst-case interpolation error functional of the site set: the square
/// root of the Schur-complement diagonal K(x,x) - k(x)^T K(S,S)^{-1} k(x),
/// clamped at zero. An empty site set gives sqrt(K(x,x)).
class PowerFunction {
 public:
  PowerFunction(Kernel kernel, Matrix sites);

  double operator()(ConstVecRef x) const;
  double squared(ConstVecRef x) const;

 private:
  Kernel kernel_;
  Matrix sites_;
  Eigen::LDLT<Matrix> gram_;
};

/// Convenience wrapper building the dense route once per call.
double power_function(const Kernel& kernel, const Matrix& sites, ConstVecRef x);

/// Greedily selects n sites by maximizing the power function over the grid
/// (lowest-index tie-break, identical to the residual-diagonal rule). The
/// returned index sequence coincides with complete pivoting.
std::vector<Index> pgreedy_select(const Kernel& kernel,
                                  const CandidateGrid& grid, Index n);

}  // namespace pchol
