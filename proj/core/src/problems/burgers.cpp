#include "madrom/problems/burgers.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "detail.hpp"

namespace madrom::problems {

using diff::Graph;
using diff::Jet2;
using diff::NodeId;

BurgersInstance::BurgersInstance(BurgersSpec spec) : spec_(std::move(spec)), wrapped_{spec_} {
  if (!(spec_.nu > 0.0) || !std::isfinite(spec_.nu)) throw std::invalid_argument("burgers: nu must be > 0");
  if (std::abs(spec_.u0.period - 1.0) > 1e-12) throw std::invalid_argument("burgers: u0 must have period 1");
  if (spec_.eval_stride_x < 1 || spec_.eval_stride_t < 1) {
    throw std::invalid_argument("burgers: evaluation strides must be >= 1");
  }
  const int n = kBurgersDescriptorPoints;
  descriptor_.resize(n + (spec_.heterogeneous ? 1 : 0));
  for (int j = 0; j < n; ++j) descriptor_[j] = spec_.u0(static_cast<double>(j) / n);
  if (spec_.heterogeneous) descriptor_[n] = spec_.nu;
}

Eigen::ArrayXXd BurgersInstance::sample_interior(Rng& rng, Eigen::Index n) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::ArrayXXd out(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(0, i) = unit(rng);
    out(1, i) = 1.0 - unit(rng);
  }
  return out;
}

Eigen::ArrayXXd BurgersInstance::sample_boundary(Rng& rng, Eigen::Index n) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::ArrayXXd out(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(0, i) = unit(rng);
    out(1, i) = 0.0;
  }
  return out;
}

std::vector<NodeId> BurgersInstance::residual(Graph& g, std::span<const Jet2> u,
                                              const Eigen::ArrayXXd& /*points*/) const {
  const Jet2& v = u[0];
  const NodeId ux = detail::lane_or_zero(g, v, v.d1[0]);
  const NodeId ut = detail::lane_or_zero(g, v, v.d1[1]);
  const NodeId uxx = detail::lane_or_zero(g, v, v.d2[0]);
  return {g.sub(g.add(ut, g.mul(v.val, ux)), g.scale(uxx, spec_.nu))};
}

std::vector<NodeId> BurgersInstance::boundary(Graph& g, std::span<const NodeId> u,
                                              const Eigen::ArrayXXd& points) const {
  const Eigen::ArrayXd u0 = spec_.u0.evaluate(points.row(0).transpose());
  return {g.sub(u[0], detail::row_constant(g, u0))};
}

void BurgersInstance::solve() const {
  std::call_once(solved_, [this] {
    field_ = burgers_reference([this](double x) { return spec_.u0(x); }, spec_.nu, spec_.reference);
    const auto& opt = field_.options;
    spectra_ = slice_spectra(field_);
    std::vector<int> rows;
    for (int i = 0; i < opt.nt; i += spec_.eval_stride_t) rows.push_back(i);
    if (rows.back() != opt.nt - 1) rows.push_back(opt.nt - 1);
    std::vector<int> cols;
    for (int j = 0; j < opt.nx; j += spec_.eval_stride_x) cols.push_back(j);
    const auto total = static_cast<Eigen::Index>(rows.size() * cols.size());
    eval_.points.resize(2, total);
    eval_.values.resize(total);
    Eigen::Index c = 0;
    for (int i : rows) {
      for (int j : cols) {
        eval_.points(0, c) = field_.x(j);
        eval_.points(1, c) = field_.t(i);
        eval_.values[c] = field_.values(i, j);
        ++c;
      }
    }
  });
}

const SpaceTimeField& BurgersInstance::reference_field() const {
  solve();
  return field_;
}

const EvalSet& BurgersInstance::evaluation_set() const {
  solve();
  return eval_;
}

Eigen::ArrayXd BurgersInstance::reference(const Eigen::ArrayXXd& points) const {
  solve();
  const auto& opt = field_.options;
  const int modes = opt.nx / 2 + 1;
  const double slice_dt = opt.t_final / (opt.nt - 1);
  Eigen::ArrayXd out(points.cols());
  for (Eigen::Index p = 0; p < points.cols(); ++p) {
    const double x = points(0, p);
    const double t = points(1, p);
    if (!(t >= 0.0) || t > opt.t_final + 1e-12) throw std::invalid_argument("burgers reference: t outside [0, T]");
    int i0 = static_cast<int>(std::floor(t / slice_dt));
    i0 = std::clamp(i0, 0, opt.nt - 2);
    const double frac = std::clamp(t / slice_dt - i0, 0.0, 1.0);
    auto slice_value = [&](int i) {
      double acc = spectra_(i, 0).real();
      for (int k = 1; k < modes; ++k) {
        const double phase = 2.0 * std::numbers::pi * k * x;
        const double term = spectra_(i, k).real() * std::cos(phase) - spectra_(i, k).imag() * std::sin(phase);
        acc += (k == opt.nx / 2 ? 1.0 : 2.0) * term;
      }
      return acc;
    };
    const double v0 = slice_value(i0);
    out[p] = frac == 0.0 ? v0 : (1.0 - frac) * v0 + frac * slice_value(i0 + 1);
  }
  return out;
}

std::shared_ptr<const BurgersInstance> burgers_instance(const FourierSeries& u0, double nu) {
  BurgersSpec spec;
  spec.u0 = u0;
  spec.nu = nu;
  return std::make_shared<const BurgersInstance>(std::move(spec));
}

BurgersSpec burgers_spec_sample(Rng& rng, const GrfSpec& law, double nu, bool heterogeneous) {
  BurgersSpec spec;
  spec.u0 = grf_sample(law, rng);
  spec.heterogeneous = heterogeneous;
  if (heterogeneous) {
    std::uniform_real_distribution<double> beta(-3.0, -1.0);
    spec.nu = std::pow(10.0, beta(rng));
  } else {
    spec.nu = nu;
  }
  return spec;
}

}  // namespace madrom::problems
