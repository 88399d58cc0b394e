#include "madrom/training/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "madrom/errors.hpp"

namespace madrom::train {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr) {
  const auto n = static_cast<Eigen::Index>(params.size());
  if (static_cast<Eigen::Index>(grads.size()) != n || state.m.size() != n || state.v.size() != n) {
    throw std::invalid_argument("adam_step: size mismatch");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericalError("adam_step: non-finite gradient at index " + std::to_string(i));
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g = grads[static_cast<std::size_t>(i)];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[static_cast<std::size_t>(i)] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

}  // namespace madrom::train
