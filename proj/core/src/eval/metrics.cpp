#include "madrom/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace madrom::eval {

double relative_l2(std::span<const double> pred, std::span<const double> ref) {
  if (pred.size() != ref.size()) throw std::invalid_argument("relative_l2: length mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = pred[i] - ref[i];
    num += d * d;
    den += ref[i] * ref[i];
  }
  if (!(den > 0.0)) throw std::invalid_argument("relative_l2: reference has zero norm");
  return std::sqrt(num / den);
}

MeanCi mean_and_ci(std::span<const double> values, double level) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("mean_and_ci: need at least two values");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("mean_and_ci: level must lie in (0, 1)");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  const double t = boost::math::quantile(dist, 0.5 + level / 2.0);
  return MeanCi{mean, t * sd / std::sqrt(static_cast<double>(n))};
}

ErrorReport ErrorReport::from(std::vector<std::string> tasks, std::vector<double> errors) {
  if (tasks.size() != errors.size()) throw std::invalid_argument("error report: one task id per error");
  for (double e : errors) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw std::invalid_argument("error report: errors must be finite and >= 0");
  }
  ErrorReport r;
  r.tasks = std::move(tasks);
  r.errors = std::move(errors);
  if (r.errors.size() >= 2) {
    const MeanCi ci = mean_and_ci(r.errors);
    r.mean = ci.mean;
    r.half_width = ci.half_width;
  } else if (r.errors.size() == 1) {
    r.mean = r.errors[0];
  }
  return r;
}

std::optional<std::int64_t> iterations_to_threshold(const train::RunTrace& trace, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("iterations_to_threshold: tau must be > 0");
  for (const auto& row : trace.rows) {
    if (row.relative_l2 && *row.relative_l2 <= tau) return row.iteration;
  }
  return std::nullopt;
}

double median_iterations(std::span<const std::optional<std::int64_t>> values) {
  if (values.empty()) throw std::invalid_argument("median_iterations: no values");
  std::vector<double> v;
  for (const auto& x : values) {
    v.push_back(x ? static_cast<double>(*x) : std::numeric_limits<double>::infinity());
  }
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return v[m];
  if (std::isinf(v[m - 1]) || std::isinf(v[m])) return std::max(v[m - 1], v[m]);
  return 0.5 * (v[m - 1] + v[m]);
}

}  // namespace madrom::eval
