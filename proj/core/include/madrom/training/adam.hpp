#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Core>

namespace madrom::train {

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(Eigen::Index size = 0)
      : m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)) {}
};

/// One bias-corrected Adam update in place. Throws std::invalid_argument on a
/// size mismatch and NumericalError on a non-finite gradient; in both cases
/// nothing is modified.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr);

}  // namespace madrom::train
