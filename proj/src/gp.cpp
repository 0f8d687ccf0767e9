#include "pchol/gp.hpp"

#include <cmath>
#include <stdexcept>

#include "pchol/cholesky.hpp"
#include "pchol/errors.hpp"

namespace pchol {

namespace {

Matrix gram_matrix(const Kernel& kernel, const Matrix& sites, double jitter) {
  const Index n = sites.cols();
  Matrix gram(n, n);
  for (Index i = 0; i < n; ++i) {
    gram(i, i) = kernel(sites.col(i), sites.col(i)) + jitter;
    for (Index j = 0; j < i; ++j) {
      const double v = kernel(sites.col(i), sites.col(j));
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }
  return gram;
}

Eigen::LDLT<Matrix> factor_gram(const Kernel& kernel, const Matrix& sites,
                                double jitter, const char* who) {
  Eigen::LDLT<Matrix> ldlt(gram_matrix(kernel, sites, jitter));
  if (sites.cols() > 0) {
    const Vector d = ldlt.vectorD();
    const double dmax = d.maxCoeff();
    if (ldlt.info() != Eigen::Success || !(d.minCoeff() > 1e-14 * dmax))
      throw NumericError(std::string(who) + ": Gram matrix is numerically singular");
  }
  return ldlt;
}

}  // namespace

GpPosterior::GpPosterior(Kernel kernel, Matrix sites, Vector values,
                         MeanFn prior_mean, double jitter)
    : kernel_(std::move(kernel)),
      sites_(std::move(sites)),
      values_(std::move(values)),
      prior_mean_(std::move(prior_mean)) {
  if (sites_.rows() != kernel_.dim())
    throw std::invalid_argument("GpPosterior: site dimension mismatch");
  if (values_.size() != sites_.cols())
    throw std::invalid_argument("GpPosterior: one observation per site required");
  if (jitter < 0.0) throw std::invalid_argument("GpPosterior: jitter must be >= 0");
  gram_ = factor_gram(kernel_, sites_, jitter, "GpPosterior");
  Vector centered = values_;
  if (prior_mean_)
    for (Index i = 0; i < sites_.cols(); ++i)
      centered[i] -= prior_mean_(sites_.col(i));
  weights_ = sites_.cols() > 0 ? Vector(gram_.solve(centered)) : Vector();
}

Vector GpPosterior::cross_vector(ConstVecRef x) const {
  Vector k(sites_.cols());
  for (Index i = 0; i < sites_.cols(); ++i) k[i] = kernel_(x, sites_.col(i));
  return k;
}

double GpPosterior::mean(ConstVecRef x) const {
  const double base = prior_mean_ ? prior_mean_(x) : 0.0;
  if (sites_.cols() == 0) return base;
  return base + cross_vector(x).dot(weights_);
}

double GpPosterior::cov(ConstVecRef x, ConstVecRef y) const {
  const double kxy = kernel_(x, y);
  if (sites_.cols() == 0) return kxy;
  const Vector kx = cross_vector(x);
  const Vector ky = cross_vector(y);
  return kxy - kx.dot(gram_.solve(ky));
}

PowerFunction::PowerFunction(Kernel kernel, Matrix sites)
    : kernel_(std::move(kernel)), sites_(std::move(sites)) {
  if (sites_.cols() > 0 && sites_.rows() != kernel_.dim())
    throw std::invalid_argument("PowerFunction: site dimension mismatch");
  gram_ = factor_gram(kernel_, sites_, 0.0, "PowerFunction");
}

double PowerFunction::squared(ConstVecRef x) const {
  const double kxx = kernel_(x, x);
  if (sites_.cols() == 0) return std::max(kxx, 0.0);
  Vector k(sites_.cols());
  for (Index i = 0; i < sites_.cols(); ++i) k[i] = kernel_(x, sites_.col(i));
  return std::max(kxx - k.dot(gram_.solve(k)), 0.0);
}

double PowerFunction::operator()(ConstVecRef x) const {
  return std::sqrt(squared(x));
}

double power_function(const Kernel& kernel, const Matrix& sites, ConstVecRef x) {
  return PowerFunction(kernel, sites)(x);
}

std::vector<Index> pgreedy_select(const Kernel& kernel,
                                  const CandidateGrid& grid, Index n) {
  if (n < 0 || n > grid.size())
    throw std::invalid_argument("pgreedy_select: n out of range");
  if (kernel.dim() != grid.dim())
    throw std::invalid_argument("pgreedy_select: dimension mismatch");

  Vector diag(grid.size());
  for (Index i = 0; i < grid.size(); ++i)
    diag[i] = kernel(grid.point(i), grid.point(i));
  const double tol = 1e-12 * diag.maxCoeff();

  std::vector<Index> chosen;
  Matrix sites(grid.dim(), 0);
  for (Index step = 0; step < n; ++step) {
    Vector p2(grid.size());
    if (chosen.empty()) {
      p2 = diag;
    } else {
      Eigen::LDLT<Matrix> gram;
      try {
        gram = factor_gram(kernel, sites, 0.0, "pgreedy_select");
      } catch (const NumericError& err) {
        throw BreakdownError(err.what(), static_cast<long>(chosen.size()));
      }
      const Index k = sites.cols();
      Matrix cross(k, grid.size());
      for (Index i = 0; i < grid.size(); ++i)
        for (Index j = 0; j < k; ++j)
          cross(j, i) = kernel(grid.point(i), sites.col(j));
      const Matrix solved = gram.solve(cross);
      for (Index i = 0; i < grid.size(); ++i)
        p2[i] = diag[i] - cross.col(i).dot(solved.col(i));
    }
    const auto [idx, value] = slack_argmax(p2);
    if (!(value > tol))
      throw BreakdownError("pgreedy_select: power function is numerically zero",
                           static_cast<long>(chosen.size()));
    chosen.push_back(idx);
    sites.conservativeResize(Eigen::NoChange, sites.cols() + 1);
    sites.col(sites.cols() - 1) = grid.point(idx);
  }
  return chosen;
}

}  // namespace pchol
