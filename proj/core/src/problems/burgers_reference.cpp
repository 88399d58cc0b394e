#include "madrom/problems/burgers_reference.hpp"

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

#include "madrom/errors.hpp"

namespace madrom::problems {

namespace {

using cplx = std::complex<double>;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

/// r2c / c2r pair of size n with owned buffers. Planning is serialized because
/// the FFTW planner is not re-entrant.
class Fft {
 public:
  explicit Fft(int n) : n_(n), real_(static_cast<std::size_t>(n)), spec_(static_cast<std::size_t>(n / 2 + 1)) {
    std::lock_guard lock(planner_mutex());
    auto* c = reinterpret_cast<fftw_complex*>(spec_.data());
    forward_ = fftw_plan_dft_r2c_1d(n, real_.data(), c, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(n, c, real_.data(), FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  void forward(const std::vector<double>& in, std::vector<cplx>& out) {
    real_ = in;
    fftw_execute(forward_);
    out = spec_;
  }
  /// Normalized inverse (c2r destroys its input, hence the copy).
  void inverse(const std::vector<cplx>& in, std::vector<double>& out) {
    spec_ = in;
    fftw_execute(inverse_);
    out.resize(real_.size());
    for (std::size_t i = 0; i < real_.size(); ++i) out[i] = real_[i] / n_;
  }

 private:
  int n_;
  std::vector<double> real_;
  std::vector<cplx> spec_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace

SpaceTimeField burgers_reference(const std::function<double(double)>& u0, double nu,
                                 const BurgersReferenceOptions& options) {
  const int nx = options.nx;
  if (nx < 4 || (nx & (nx - 1)) != 0) throw std::invalid_argument("burgers_reference: nx must be a power of two");
  if (options.nt < 2) throw std::invalid_argument("burgers_reference: nt must be >= 2");
  if (options.substeps < 1) throw std::invalid_argument("burgers_reference: substeps must be >= 1");
  if (!(nu > 0.0)) throw std::invalid_argument("burgers_reference: nu must be > 0");
  if (!(options.t_final > 0.0)) throw std::invalid_argument("burgers_reference: t_final must be > 0");

  const int modes = nx / 2 + 1;
  const double dt = options.t_final / (options.nt - 1) / options.substeps;
  const int cutoff = nx / 3;

  std::vector<double> kappa(static_cast<std::size_t>(modes));
  std::vector<double> keep(static_cast<std::size_t>(modes));
  std::vector<double> e_half(static_cast<std::size_t>(modes));
  for (int k = 0; k < modes; ++k) {
    kappa[static_cast<std::size_t>(k)] = k == nx / 2 ? 0.0 : 2.0 * std::numbers::pi * k;
    keep[static_cast<std::size_t>(k)] = k <= cutoff ? 1.0 : 0.0;
    const double kk = 2.0 * std::numbers::pi * k;
    e_half[static_cast<std::size_t>(k)] = std::exp(-nu * kk * kk * dt / 2.0);
  }

  Fft fft(nx);
  std::vector<double> u(static_cast<std::size_t>(nx));
  for (int j = 0; j < nx; ++j) u[static_cast<std::size_t>(j)] = u0(static_cast<double>(j) / nx);

  SpaceTimeField field;
  field.options = options;
  field.values.resize(options.nt, nx);
  for (int j = 0; j < nx; ++j) field.values(0, j) = u[static_cast<std::size_t>(j)];

  std::vector<cplx> uh;
  fft.forward(u, uh);

  std::vector<double> phys;
  std::vector<cplx> work(static_cast<std::size_t>(modes));
  // Advection term -(u^2 / 2)_x in spectral form, dealiased on input and output.
  auto nonlinear = [&](const std::vector<cplx>& vh, std::vector<cplx>& out) {
    for (int k = 0; k < modes; ++k) work[static_cast<std::size_t>(k)] = vh[static_cast<std::size_t>(k)] * keep[static_cast<std::size_t>(k)];
    fft.inverse(work, phys);
    for (double& v : phys) v = 0.5 * v * v;
    fft.forward(phys, out);
    for (int k = 0; k < modes; ++k) {
      const auto i = static_cast<std::size_t>(k);
      out[i] *= cplx(0.0, -kappa[i]) * keep[i];
    }
  };

  std::vector<cplx> k1, k2, k3, k4, stage(static_cast<std::size_t>(modes));
  long step = 0;
  for (int slice = 1; slice < options.nt; ++slice) {
    for (int sub = 0; sub < options.substeps; ++sub, ++step) {
      nonlinear(uh, k1);
      for (int k = 0; k < modes; ++k) {
        const auto i = static_cast<std::size_t>(k);
        stage[i] = e_half[i] * (uh[i] + 0.5 * dt * k1[i]);
      }
      nonlinear(stage, k2);
      for (int k = 0; k < modes; ++k) {
        const auto i = static_cast<std::size_t>(k);
        stage[i] = e_half[i] * uh[i] + 0.5 * dt * k2[i];
      }
      nonlinear(stage, k3);
      for (int k = 0; k < modes; ++k) {
        const auto i = static_cast<std::size_t>(k);
        stage[i] = e_half[i] * e_half[i] * uh[i] + dt * e_half[i] * k3[i];
      }
      nonlinear(stage, k4);
      bool finite = true;
      for (int k = 0; k < modes; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const double e = e_half[i];
        uh[i] = e * e * uh[i] + dt / 6.0 * (e * e * k1[i] + 2.0 * e * (k2[i] + k3[i]) + k4[i]);
        finite = finite && std::isfinite(uh[i].real()) && std::isfinite(uh[i].imag());
      }
      if (!finite) {
        throw NumericalError("burgers_reference: non-finite state at step " + std::to_string(step + 1));
      }
    }
    fft.inverse(uh, phys);
    for (int j = 0; j < nx; ++j) field.values(slice, j) = phys[static_cast<std::size_t>(j)];
  }
  return field;
}

Eigen::ArrayXXcd slice_spectra(const SpaceTimeField& field) {
  const int nx = field.options.nx;
  const int nt = static_cast<int>(field.values.rows());
  const int modes = nx / 2 + 1;
  Fft fft(nx);
  Eigen::ArrayXXcd out(nt, modes);
  std::vector<double> row(static_cast<std::size_t>(nx));
  std::vector<cplx> spec;
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < nx; ++j) row[static_cast<std::size_t>(j)] = field.values(i, j);
    fft.forward(row, spec);
    for (int k = 0; k < modes; ++k) out(i, k) = spec[static_cast<std::size_t>(k)] / static_cast<double>(nx);
  }
  return out;
}

}  // namespace madrom::problems
