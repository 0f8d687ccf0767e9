#pragma once

#include <iosfwd>
#include <vector>

#include "pchol/kernel.hpp"

namespace pchol {

/// One row of a convergence trace. min_sep and bound_pack are +infinity at
/// n = 1 (no pair of pivots, no packing constraint); bound_fill is NaN when
/// the kernel has no certified diagonal-Lipschitz constant and bound_c11 is
/// NaN unless the kernel carries C^{1,1} constants.
struct ConvergenceRecord {
  Index n = 0;
  double sup_residual = 0.0;
  double fill = 0.0;
  double min_sep = 0.0;
  double bound_fill = 0.0;  // 4 L (fill + eta)
  double bound_pack = 0.0;  // 8 L R / (n^{1/d} - 1)
  double bound_c11 = 0.0;   // sqrt(d) (2 L + L0^2 / K_min) (fill + eta)^2
  Index grid_size = 0;
  double wall_time_ms = 0.0;
};

/// Least-squares fit of log(sup_residual) against log(n).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;  // of the log-log line
  double r_squared = 0.0;
  Index n_lo = 0, n_hi = 0;
};

/// Ordinary least squares on (log n, log sup_residual) over records with
/// n in [n_lo, n_hi] and sup_residual above `floor` (pass 10x the breakdown
/// tolerance to keep roundoff-dominated steps out of the fit). Requires at
/// least 5 surviving records.
RateFit fit_rate(const std::vector<ConvergenceRecord>& records, Index n_lo,
                 Index n_hi, double floor);

/// CSV with a fixed header naming every record field; decimals carry 17
/// significant digits so values round-trip exactly. Note the wall_time_ms
/// column is wall-clock measurement and is the one column that varies
/// between identical runs.
void write_records_csv(std::ostream& out,
                       const std::vector<ConvergenceRecord>& records);
extern const char* const kRecordCsvHeader;

}  // namespace pchol
