#pragma once

#include <stdexcept>
#include <string>

namespace pchol {

/// A pivot whose residual diagonal value is numerically zero; the
/// factorization cannot continue past this step.
class BreakdownError : public std::runtime_error {
 public:
  explicit BreakdownError(const std::string& what, long steps_completed = 0)
      : std::runtime_error(what), steps_completed_(steps_completed) {}
  long steps_completed() const { return steps_completed_; }

 private:
  long steps_completed_;
};

/// Loss of numerical meaning: non-finite kernel values, residual diagonals
/// below the roundoff floor, singular Gram systems.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured limit was exceeded (grid point cap, refinement depth).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pchol
