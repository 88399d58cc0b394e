#pragma once

#include <functional>
#include <span>
#include <vector>

namespace madrom::diff {

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Relative discrepancy |a - b| / max(|a|, |b|), taken as 0 when both
/// magnitudes are below `floor`.
double relative_error(double a, double b, double floor = 1e-12);

struct FiniteDiffReport {
  std::vector<double> numeric;   // central-difference derivative per coordinate
  std::vector<double> rel_err;   // against the supplied analytic derivative
  double max_rel_err = 0.0;
  bool has_nonfinite = false;    // some difference or error was inf/nan
};

/// Central differences (f(x+h e_i) - f(x-h e_i)) / 2h per coordinate, compared
/// with `analytic` (same length as x0). Requires h > 0.
FiniteDiffReport finite_diff_check(const ScalarFunction& f, std::span<const double> x0, double h,
                                   std::span<const double> analytic, double floor = 1e-12);

/// Central first difference of a univariate function.
double central_first(const std::function<double(double)>& f, double x, double h);
/// Central second difference (f(x+h) - 2 f(x) + f(x-h)) / h^2.
double central_second(const std::function<double(double)>& f, double x, double h);

}  // namespace madrom::diff
