#pragma once

#include <vector>

#include <Eigen/Core>

#include "madrom/problems/problem.hpp"

namespace madrom::problems {

enum class GrfDomain : std::uint8_t { kPeriodicInterval = 0, kUnitCircle = 1 };

/// Gaussian random field with covariance scale * (-Laplacian + shift I)^-exponent,
/// sampled as a truncated Fourier series.
struct GrfSpec {
  double scale = 100.0;    // sigma_g^2
  double shift = 9.0;      // tau^2
  double exponent = 3.0;   // alpha
  int max_mode = 64;
  GrfDomain domain = GrfDomain::kPeriodicInterval;
  double period = 1.0;     // interval length (ignored on the circle)

  void validate() const;
  /// Standard deviation of the cos and sin coefficients of mode k.
  double mode_std(int k) const;

  friend bool operator==(const GrfSpec&, const GrfSpec&) = default;
};

/// f(s) = a0 + sum_k a_k cos(w k s) + b_k sin(w k s), w = 2 pi / period.
/// On the unit circle period = 2 pi, so s is the polar angle.
struct FourierSeries {
  double a0 = 0.0;
  std::vector<double> a;
  std::vector<double> b;
  double period = 1.0;

  int modes() const { return static_cast<int>(a.size()); }
  double operator()(double s) const;
  Eigen::ArrayXd evaluate(const Eigen::ArrayXd& s) const;

  friend bool operator==(const FourierSeries&, const FourierSeries&) = default;
};

/// Independent N(0, mode_std(k)^2) draws in the order a0, (a1, b1), (a2, b2), ...
FourierSeries grf_sample(const GrfSpec& spec, Rng& rng);

/// The initial-condition law used for Burgers: 100 (-Lap + 9 I)^-3 on [0, 1).
GrfSpec burgers_grf();
/// Shifted law for out-of-distribution Burgers tasks: 100 (-Lap + 25 I)^-2.5.
GrfSpec burgers_extrapolation_grf();
/// Boundary data law on the unit circle: 10^1.5 (-Lap + 100 I)^-3.
GrfSpec laplace_circle_grf();

}  // namespace madrom::problems
