#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pchol {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ConstVecRef = Eigen::Ref<const Eigen::VectorXd>;
using Index = Eigen::Index;

/// Constants for kernels whose first derivatives are Lipschitz:
/// deriv_lipschitz bounds how fast any first partial of K drifts away from
/// its value on the diagonal, |d_j K(x,y) - d_j K(x,x)| <= c * ||x-y||,
/// and first_arg_lipschitz bounds |K(x,y) - K(x',y)| <= c0 * ||x-x'||.
struct C11Constants {
  double deriv_lipschitz;
  double first_arg_lipschitz;
};

/// A symmetric positive-definite kernel together with its analytic
/// smoothness metadata. Evaluation is a pure function: kernels are
/// immutable after construction and safe to call from many threads.
///
/// diag_lipschitz, when set, is a certified constant L with
///   |K(x,x) - K(x,y)| <= L ||x-y||   on the kernel's working domain.
class Kernel {
 public:
  using EvalFn = std::function<double(ConstVecRef, ConstVecRef)>;

  Kernel(std::string name, int dim, EvalFn eval,
         std::optional<double> diag_lipschitz = std::nullopt,
         std::optional<C11Constants> c11 = std::nullopt);

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  std::optional<double> diag_lipschitz() const { return diag_lipschitz_; }
  std::optional<C11Constants> c11_constants() const { return c11_; }

  /// K(x,y). Throws std::invalid_argument on a dimension mismatch.
  double operator()(ConstVecRef x, ConstVecRef y) const;

 private:
  std::string name_;
  int dim_;
  EvalFn eval_;
  std::optional<double> diag_lipschitz_;
  std::optional<C11Constants> c11_;
};

// ---------------------------------------------------------------------------
// Built-in kernel zoo. Every certified constant below is derived in the
// factory's implementation; the test suite re-certifies each one by sampling.
// ---------------------------------------------------------------------------

/// alpha * exp(-||x-y|| / ell).  L = alpha / ell.
Kernel ou_kernel(int dim, double alpha, double ell);

/// Matern family, nu in {1/2, 1, 3/2} only, unit variance:
/// nu = 1/2:  exp(-r/ell)
/// nu = 1:    z K_1(z) with z = sqrt(2) r / ell   (modified Bessel K_1)
/// nu = 3/2:  (1 + a r) exp(-a r) with a = sqrt(3)/ell
/// Certified diagonal-Lipschitz constants: 1/ell; (sqrt(2)/ell) max_z z K_0(z);
/// sqrt(3)/(e ell).  The nu = 3/2 entry also carries C^{1,1} constants
/// (a^2, a/e).
Kernel matern_kernel(int dim, double nu, double ell);

/// Product Brownian-motion kernel prod_j min(x_j + shift, y_j + shift).
/// coord_max is the largest coordinate of the working box, needed because
/// the Lipschitz constant sqrt(d) * (coord_max + shift)^(d-1) scales with
/// the factor magnitudes. PSD requires coordinates >= -shift.
Kernel brownian_kernel(int dim = 1, double shift = 1.0, double coord_max = 1.0);

/// min(x,y) - x*y on [0,1]; the 1-d two-point boundary Green's kernel. L = 1.
Kernel green1d_kernel();

/// exp(-||x-y||^2 / (2 sigma^2)).  L = exp(-1/2)/sigma; C^{1,1} constants
/// (1/sigma^2, exp(-1/2)/sigma).
Kernel gaussian_kernel(int dim, double sigma);

/// 1 / (1 + 100 (x^2 - y^2)^2) on [-1,1].  Certified (loose) L = 3200/27.
Kernel rational_a_kernel();

/// 1 / (1 + x^2 + y^2) on [-1,1].  Certified (loose) L = 2.
Kernel rational_b_kernel();

/// The default catalog: one entry per built-in family at its canonical
/// parameters (Matern appears at all three supported nu).
std::vector<Kernel> build_catalog();

/// Non-certified fallback for kernels without an analytic constant:
/// maximizes the difference quotient |K(x,x)-K(x,y)| / ||x-y|| over `pairs`
/// random pairs drawn from the box [lower, upper]. A sampling maximum can
/// only under-estimate the true constant; treat the result as a floor.
double estimate_diag_lipschitz(const Kernel& kernel, const Vector& lower,
                               const Vector& upper, int pairs, unsigned seed);

}  // namespace pchol
