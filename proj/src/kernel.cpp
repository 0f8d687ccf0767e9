#include "pchol/kernel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

#include "pchol/errors.hpp"

namespace pchol {

Kernel::Kernel(std::string name, int dim, EvalFn eval,
               std::optional<double> diag_lipschitz,
               std::optional<C11Constants> c11)
    : name_(std::move(name)),
      dim_(dim),
      eval_(std::move(eval)),
      diag_lipschitz_(diag_lipschitz),
      c11_(c11) {
  if (dim_ < 1) throw std::invalid_argument("kernel dimension must be >= 1");
  if (!eval_) throw std::invalid_argument("kernel evaluator must be callable");
  if (diag_lipschitz_ && *diag_lipschitz_ < 0.0)
    throw std::invalid_argument("diagonal Lipschitz constant must be >= 0");
}

double Kernel::operator()(ConstVecRef x, ConstVecRef y) const {
  if (x.size() != dim_ || y.size() != dim_)
    throw std::invalid_argument("kernel argument dimension mismatch for '" +
                                name_ + "'");
  return eval_(x, y);
}

namespace {

// Maximum of z * K_0(z) over z > 0, found once by golden-section search.
// This is the peak slope (up to the sqrt(2)/ell scale) of the nu = 1 Matern
// profile, hence its certified diagonal-Lipschitz constant.
double max_z_bessel_k0() {
  auto f = [](double z) { return z * std::cyl_bessel_k(0.0, z); };
  double lo = 1e-8, hi = 8.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (f(c) > f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  return f(0.5 * (a + b));
}

double sq(double v) { return v * v; }

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

}  // namespace

Kernel ou_kernel(int dim, double alpha, double ell) {
  require_positive(alpha, "alpha");
  require_positive(ell, "ell");
  auto eval = [alpha, ell](ConstVecRef x, ConstVecRef y) {
    return alpha * std::exp(-(x - y).norm() / ell);
  };
  // |K(x,x)-K(x,y)| = alpha (1 - exp(-r/ell)) <= (alpha/ell) r.
  return Kernel("ou", dim, eval, alpha / ell);
}

Kernel matern_kernel(int dim, double nu, double ell) {
  require_positive(nu, "nu");
  require_positive(ell, "ell");
  if (nu == 0.5) {
    auto eval = [ell](ConstVecRef x, ConstVecRef y) {
      return std::exp(-(x - y).norm() / ell);
    };
    return Kernel("matern", dim, eval, 1.0 / ell);
  }
  if (nu == 1.0) {
    auto eval = [ell](ConstVecRef x, ConstVecRef y) {
      const double z = std::sqrt(2.0) * (x - y).norm() / ell;
      if (z == 0.0) return 1.0;
      return z * std::cyl_bessel_k(1.0, z);
    };
    // Peak of |d/dr profile| = (sqrt(2)/ell) max_z z K_0(z).
    static const double peak = max_z_bessel_k0();
    return Kernel("matern", dim, eval, std::sqrt(2.0) / ell * peak);
  }
  if (nu == 1.5) {
    const double a = std::sqrt(3.0) / ell;
    auto eval = [a](ConstVecRef x, ConstVecRef y) {
      const double r = (x - y).norm();
      return (1.0 + a * r) * std::exp(-a * r);
    };
    // |d/dr profile| = a^2 r exp(-a r), peaking at a/e.  The gradient of the
    // kernel is -a^2 exp(-a r) (x - y), so each partial drifts from its
    // diagonal value at rate a^2 and the gradient norm is bounded by a/e.
    const double diag_l = a / std::exp(1.0);
    return Kernel("matern", dim, eval, diag_l, C11Constants{a * a, diag_l});
  }
  throw std::invalid_argument("matern: only nu in {0.5, 1, 1.5} is supported");
}

Kernel brownian_kernel(int dim, double shift, double coord_max) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  auto eval = [dim, shift](ConstVecRef x, ConstVecRef y) {
    double prod = 1.0;
    for (int j = 0; j < dim; ++j) prod *= std::min(x[j], y[j]) + shift;
    return prod;
  };
  // Each factor changes by at most |x_j - y_j| and is bounded by
  // coord_max + shift, so the product changes by at most
  // (coord_max+shift)^(d-1) * sum_j |x_j - y_j| <= that * sqrt(d) ||x-y||.
  const double factor_max = coord_max + shift;
  const double diag_l =
      std::sqrt(static_cast<double>(dim)) * std::pow(factor_max, dim - 1);
  return Kernel("brownian", dim, eval, diag_l);
}

Kernel green1d_kernel() {
  auto eval = [](ConstVecRef x, ConstVecRef y) {
    return std::min(x[0], y[0]) - x[0] * y[0];
  };
  // |K(x,x)-K(x,y)| = |x-y| * x for y >= x and |x-y| * (1-x) otherwise,
  // both <= |x-y| on [0,1].
  return Kernel("green1d", 1, eval, 1.0);
}

Kernel gaussian_kernel(int dim, double sigma) {
  require_positive(sigma, "sigma");
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  auto eval = [inv2s2](ConstVecRef x, ConstVecRef y) {
    return std::exp(-(x - y).squaredNorm() * inv2s2);
  };
  // sup_r d/dr (1 - exp(-r^2/(2 sigma^2))) = exp(-1/2)/sigma at r = sigma.
  const double diag_l = std::exp(-0.5) / sigma;
  // Gradient: -((x-y)/sigma^2) K, so partials drift from the diagonal at
  // rate 1/sigma^2 and the gradient norm peaks at exp(-1/2)/sigma.
  return Kernel("gaussian", dim, eval, diag_l,
                C11Constants{1.0 / (sigma * sigma), diag_l});
}

Kernel rational_a_kernel() {
  auto eval = [](ConstVecRef x, ConstVecRef y) {
    return 1.0 / (1.0 + 100.0 * sq(sq(x[0]) - sq(y[0])));
  };
  // 1 - K <= 100 (x+y)^2 (x-y)^2 and |x+y| <= 2 - |x-y| on [-1,1], so the
  // difference quotient is bounded by max_t 100 t (2-t)^2 = 3200/27.
  return Kernel("rational-a", 1, eval, 3200.0 / 27.0);
}

Kernel rational_b_kernel() {
  auto eval = [](ConstVecRef x, ConstVecRef y) {
    return 1.0 / (1.0 + sq(x[0]) + sq(y[0]));
  };
  // |K(x,x)-K(x,y)| = |y^2-x^2| / ((1+2x^2)(1+x^2+y^2)) <= |x+y| |x-y|
  // <= 2 |x-y| on [-1,1].
  return Kernel("rational-b", 1, eval, 2.0);
}

std::vector<Kernel> build_catalog() {
  std::vector<Kernel> catalog;
  catalog.push_back(ou_kernel(1, 1.0, 0.5));
  catalog.push_back(matern_kernel(1, 0.5, 0.5));
  catalog.push_back(matern_kernel(1, 1.0, 0.5));
  catalog.push_back(matern_kernel(1, 1.5, 0.5));
  catalog.push_back(brownian_kernel(1, 1.0, 1.0));
  catalog.push_back(green1d_kernel());
  catalog.push_back(gaussian_kernel(1, 1.0));
  catalog.push_back(rational_a_kernel());
  catalog.push_back(rational_b_kernel());
  return catalog;
}

double estimate_diag_lipschitz(const Kernel& kernel, const Vector& lower,
                               const Vector& upper, int pairs, unsigned seed) {
  if (lower.size() != kernel.dim() || upper.size() != kernel.dim())
    throw std::invalid_argument("estimate_diag_lipschitz: box dimension mismatch");
  if (pairs < 1) throw std::invalid_argument("pairs must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int d = kernel.dim();
  Vector x(d), y(d);
  double best = 0.0;
  for (int p = 0; p < pairs; ++p) {
    for (int j = 0; j < d; ++j) {
      x[j] = lower[j] + (upper[j] - lower[j]) * unit(rng);
      y[j] = lower[j] + (upper[j] - lower[j]) * unit(rng);
    }
    const double r = (x - y).norm();
    if (r == 0.0) continue;
    const double quot = std::abs(kernel(x, x) - kernel(x, y)) / r;
    if (quot > best) best = quot;
  }
  return best;
}

}  // namespace pchol
