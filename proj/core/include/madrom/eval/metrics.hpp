#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "madrom/training/trace.hpp"

namespace madrom::eval {

/// ||pred - ref||_2 / ||ref||_2. Throws std::invalid_argument on length
/// mismatch or a zero reference.
double relative_l2(std::span<const double> pred, std::span<const double> ref);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 95% Student-t, N - 1 degrees of freedom
};

/// Requires at least two values.
MeanCi mean_and_ci(std::span<const double> values, double level = 0.95);

struct ErrorReport {
  std::vector<std::string> tasks;
  std::vector<double> errors;
  double mean = 0.0;
  double half_width = 0.0;

  static ErrorReport from(std::vector<std::string> tasks, std::vector<double> errors);
};

/// First recorded iteration whose relative L2 is <= tau, if any.
std::optional<std::int64_t> iterations_to_threshold(const train::RunTrace& trace, double tau);

/// Median of the values, treating missing entries as +infinity (never reached).
double median_iterations(std::span<const std::optional<std::int64_t>> values);

}  // namespace madrom::eval
