#pragma once

#include <functional>

#include <Eigen/Core>

namespace madrom::problems {

struct BurgersReferenceOptions {
  int nx = 1024;             // power of two
  int nt = 101;              // recorded slices on [0, t_final], both ends included
  int substeps = 20;         // RK4 steps between consecutive slices
  double t_final = 1.0;

  friend bool operator==(const BurgersReferenceOptions&, const BurgersReferenceOptions&) = default;
};

/// Solution samples on x_j = j / nx (j < nx) and t_i = i t_final / (nt - 1).
struct SpaceTimeField {
  BurgersReferenceOptions options;
  Eigen::ArrayXXd values;  // nt x nx, row i is the slice at t_i

  double x(int j) const { return static_cast<double>(j) / options.nx; }
  double t(int i) const { return options.t_final * i / (options.nt - 1); }
};

/// Pseudo-spectral solver for u_t + u u_x = nu u_xx on the unit periodic
/// interval: FFT derivatives with 2/3 dealiasing of the advection term, an
/// integrating factor for diffusion and classical RK4 on what remains.
/// Throws NumericalError naming the step at which values stop being finite.
SpaceTimeField burgers_reference(const std::function<double(double)>& u0, double nu,
                                 const BurgersReferenceOptions& options = {});

/// Normalized one-sided spectrum of every slice, nt x (nx/2 + 1):
/// u(x) = Re sum_k c_k w_k exp(2 pi i k x) with w_0 = w_{nx/2} = 1, else 2.
Eigen::ArrayXXcd slice_spectra(const SpaceTimeField& field);

}  // namespace madrom::problems
