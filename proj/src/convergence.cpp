#include "pchol/convergence.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace pchol {

RateFit fit_rate(const std::vector<ConvergenceRecord>& records, Index n_lo,
                 Index n_hi, double floor) {
  if (n_lo < 1 || n_hi < n_lo)
    throw std::invalid_argument("fit_rate: need 1 <= n_lo <= n_hi");
  std::vector<double> xs, ys;
  for (const auto& rec : records) {
    if (rec.n < n_lo || rec.n > n_hi) continue;
    if (!(rec.sup_residual > floor)) continue;
    xs.push_back(std::log(static_cast<double>(rec.n)));
    ys.push_back(std::log(rec.sup_residual));
  }
  const std::size_t m = xs.size();
  if (m < 5)
    throw std::invalid_argument("fit_rate: fewer than 5 usable records in range");

  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / static_cast<double>(m);
  const double my = sy / static_cast<double>(m);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: degenerate abscissa");

  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.n_lo = n_lo;
  fit.n_hi = n_hi;
  return fit;
}

const char* const kRecordCsvHeader =
    "n,sup_residual,fill,min_sep,bound_fill,bound_pack,bound_c11,grid_size,"
    "wall_time_ms";

namespace {

void append_g17(std::string& line, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  line += buf;
}

}  // namespace

void write_records_csv(std::ostream& out,
                       const std::vector<ConvergenceRecord>& records) {
  out << kRecordCsvHeader << '\n';
  std::string line;
  for (const auto& rec : records) {
    line.clear();
    line += std::to_string(rec.n);
    line += ',';
    append_g17(line, rec.sup_residual);
    line += ',';
    append_g17(line, rec.fill);
    line += ',';
    append_g17(line, rec.min_sep);
    line += ',';
    append_g17(line, rec.bound_fill);
    line += ',';
    append_g17(line, rec.bound_pack);
    line += ',';
    append_g17(line, rec.bound_c11);
    line += ',';
    line += std::to_string(rec.grid_size);
    line += ',';
    append_g17(line, rec.wall_time_ms);
    out << line << '\n';
  }
}

}  // namespace pchol
