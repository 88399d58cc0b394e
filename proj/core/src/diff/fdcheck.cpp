#include "madrom/diff/fdcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace madrom::diff {

double relative_error(double a, double b, double floor) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale < floor) return 0.0;
  return std::abs(a - b) / scale;
}

FiniteDiffReport finite_diff_check(const ScalarFunction& f, std::span<const double> x0, double h,
                                   std::span<const double> analytic, double floor) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_check: h must be > 0");
  if (analytic.size() != x0.size()) {
    throw std::invalid_argument("finite_diff_check: analytic gradient size mismatch");
  }
  FiniteDiffReport report;
  std::vector<double> x(x0.begin(), x0.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double fp = f(x);
    x[i] = saved - h;
    const double fm = f(x);
    x[i] = saved;
    const double d = (fp - fm) / (2.0 * h);
    const double e = relative_error(analytic[i], d, floor);
    report.numeric.push_back(d);
    report.rel_err.push_back(e);
    if (!std::isfinite(d) || !std::isfinite(e)) {
      report.has_nonfinite = true;
      report.max_rel_err = INFINITY;
    } else {
      report.max_rel_err = std::max(report.max_rel_err, e);
    }
  }
  return report;
}

double central_first(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double central_second(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace madrom::diff
