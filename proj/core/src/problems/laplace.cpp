#include "madrom/problems/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "detail.hpp"

namespace madrom::problems {

using diff::Graph;
using diff::Jet2;
using diff::NodeId;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kArcSegments = 4096;

void check_circle_series(const FourierSeries& h) {
  if (std::abs(h.period - kTwoPi) > 1e-12) {
    throw std::invalid_argument("laplace: boundary data must have period 2 pi");
  }
  if (h.a.size() != h.b.size()) throw std::invalid_argument("laplace: coefficient length mismatch");
}

}  // namespace

double disk_harmonic_extension(const FourierSeries& h, double r, double phi) {
  if (!(r >= 0.0) || r > 1.0) throw std::invalid_argument("disk harmonic extension needs 0 <= r <= 1");
  check_circle_series(h);
  double out = h.a0;
  double rk = 1.0;
  for (std::size_t k = 0; k < h.a.size(); ++k) {
    rk *= r;
    const double angle = static_cast<double>(k + 1) * phi;
    out += rk * (h.a[k] * std::cos(angle) + h.b[k] * std::sin(angle));
  }
  return out;
}

Eigen::ArrayXd disk_harmonic_extension(const FourierSeries& h, const Eigen::ArrayXXd& points) {
  check_circle_series(h);
  if (points.rows() != 2) throw std::invalid_argument("disk harmonic extension needs 2 x N points");
  const Eigen::ArrayXd x = points.row(0).transpose();
  const Eigen::ArrayXd y = points.row(1).transpose();
  if (((x * x + y * y) > 1.0 + 1e-12).any()) {
    throw std::invalid_argument("disk harmonic extension needs points with r <= 1");
  }
  Eigen::ArrayXd out = Eigen::ArrayXd::Constant(x.size(), h.a0);
  Eigen::ArrayXd p = x;
  Eigen::ArrayXd q = y;
  for (std::size_t k = 0; k < h.a.size(); ++k) {
    out += h.a[k] * p + h.b[k] * q;
    const Eigen::ArrayXd pn = x * p - y * q;
    q = x * q + y * p;
    p = pn;
  }
  return out;
}

Field disk_harmonic_field(const FourierSeries& h) {
  check_circle_series(h);
  return Field([h](Graph& g, std::span<const Jet2> xy) {
    const Jet2& x = xy[0];
    const Jet2& y = xy[1];
    Jet2 out = diff::lift_constant(g, diff::Block::Constant(1, g.value(x.val).cols(), h.a0), 2);
    Jet2 p = x;
    Jet2 q = y;
    for (std::size_t k = 0; k < h.a.size(); ++k) {
      out = diff::jet_add(g, out, diff::jet_scale(g, p, h.a[k]));
      out = diff::jet_add(g, out, diff::jet_scale(g, q, h.b[k]));
      if (k + 1 == h.a.size()) break;
      Jet2 pn = diff::jet_sub(g, diff::jet_mul(g, x, p), diff::jet_mul(g, y, q));
      q = diff::jet_add(g, diff::jet_mul(g, x, q), diff::jet_mul(g, y, p));
      p = std::move(pn);
    }
    return std::vector<Jet2>{out};
  });
}

LaplaceInstance::LaplaceInstance(LaplaceSpec spec) : spec_(std::move(spec)), wrapped_{spec_} {
  check_circle_series(spec_.boundary_data);
  if (spec_.eval_points < 1) throw std::invalid_argument("laplace: need evaluation points");
  if (const auto* poly = std::get_if<ConvexPolygon>(&spec_.shape)) {
    poly->validate();
    box_lo_ = poly->vertices[0];
    box_hi_ = poly->vertices[0];
    for (const auto& v : poly->vertices) {
      box_lo_ = box_lo_.cwiseMin(v);
      box_hi_ = box_hi_.cwiseMax(v);
    }
  } else {
    const auto& e = std::get<Ellipse>(spec_.shape);
    e.validate();
    const double c = std::cos(e.rotation);
    const double s = std::sin(e.rotation);
    const Eigen::Vector2d half(std::hypot(e.semi_a * c, e.semi_b * s),
                               std::hypot(e.semi_a * s, e.semi_b * c));
    box_lo_ = e.center - half;
    box_hi_ = e.center + half;
    arc_.assign(kArcSegments + 1, 0.0);
    for (int i = 0; i < kArcSegments; ++i) {
      const double t0 = kTwoPi * i / kArcSegments;
      const double t1 = kTwoPi * (i + 1) / kArcSegments;
      arc_[static_cast<std::size_t>(i + 1)] = arc_[static_cast<std::size_t>(i)] +
                                              (e.point_at(t1) - e.point_at(t0)).norm();
    }
  }
  Rng rng(spec_.eval_seed);
  eval_.points = sample_interior(rng, spec_.eval_points);
  eval_.values = reference(eval_.points);
}

bool LaplaceInstance::contains(const Eigen::Vector2d& p) const {
  return std::visit([&](const auto& shape) { return shape.contains(p); }, spec_.shape);
}

Eigen::ArrayXXd LaplaceInstance::sample_interior(Rng& rng, Eigen::Index n) const {
  std::uniform_real_distribution<double> ux(box_lo_.x(), box_hi_.x());
  std::uniform_real_distribution<double> uy(box_lo_.y(), box_hi_.y());
  Eigen::ArrayXXd out(2, n);
  for (Eigen::Index i = 0; i < n;) {
    const Eigen::Vector2d p(ux(rng), uy(rng));
    if (!contains(p)) continue;
    out(0, i) = p.x();
    out(1, i) = p.y();
    ++i;
  }
  return out;
}

Eigen::ArrayXXd LaplaceInstance::sample_boundary(Rng& rng, Eigen::Index n) const {
  Eigen::ArrayXXd out(2, n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (const auto* poly = std::get_if<ConvexPolygon>(&spec_.shape)) {
    const auto& v = poly->vertices;
    std::vector<double> cum{0.0};
    for (std::size_t i = 0; i < v.size(); ++i) cum.push_back(cum.back() + (v[(i + 1) % v.size()] - v[i]).norm());
    for (Eigen::Index j = 0; j < n; ++j) {
      const double s = unit(rng) * cum.back();
      auto it = std::upper_bound(cum.begin(), cum.end(), s);
      std::size_t e = static_cast<std::size_t>(std::distance(cum.begin(), it)) - 1;
      e = std::min(e, v.size() - 1);
      const double frac = (s - cum[e]) / (cum[e + 1] - cum[e]);
      const Eigen::Vector2d p = v[e] + frac * (v[(e + 1) % v.size()] - v[e]);
      out(0, j) = p.x();
      out(1, j) = p.y();
    }
    return out;
  }
  const auto& ellipse = std::get<Ellipse>(spec_.shape);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = unit(rng) * arc_.back();
    auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
    std::size_t e = static_cast<std::size_t>(std::distance(arc_.begin(), it)) - 1;
    e = std::min<std::size_t>(e, kArcSegments - 1);
    const double frac = (s - arc_[e]) / (arc_[e + 1] - arc_[e]);
    const Eigen::Vector2d p = ellipse.point_at(kTwoPi * (static_cast<double>(e) + frac) / kArcSegments);
    out(0, j) = p.x();
    out(1, j) = p.y();
  }
  return out;
}

std::vector<NodeId> LaplaceInstance::residual(Graph& g, std::span<const Jet2> u,
                                              const Eigen::ArrayXXd& /*points*/) const {
  return {g.add(detail::lane_or_zero(g, u[0], u[0].d2[0]),
                detail::lane_or_zero(g, u[0], u[0].d2[1]))};
}

std::vector<NodeId> LaplaceInstance::boundary(Graph& g, std::span<const NodeId> u,
                                              const Eigen::ArrayXXd& points) const {
  return {g.sub(u[0], detail::row_constant(g, reference(points)))};
}

Eigen::ArrayXd LaplaceInstance::reference(const Eigen::ArrayXXd& points) const {
  return disk_harmonic_extension(spec_.boundary_data, points);
}

std::optional<Field> LaplaceInstance::analytic_field() const {
  return disk_harmonic_field(spec_.boundary_data);
}

std::shared_ptr<const LaplaceInstance> laplace_instance(const ConvexPolygon& poly,
                                                        const FourierSeries& h,
                                                        std::uint64_t eval_seed) {
  LaplaceSpec spec;
  spec.shape = poly;
  spec.boundary_data = h;
  spec.eval_seed = eval_seed;
  return std::make_shared<const LaplaceInstance>(std::move(spec));
}

std::shared_ptr<const LaplaceInstance> laplace_instance(const Ellipse& ellipse,
                                                        const FourierSeries& h,
                                                        std::uint64_t eval_seed) {
  LaplaceSpec spec;
  spec.shape = ellipse;
  spec.boundary_data = h;
  spec.eval_seed = eval_seed;
  return std::make_shared<const LaplaceInstance>(std::move(spec));
}

LaplaceSpec laplace_polygon_spec(Rng& rng) {
  LaplaceSpec spec;
  spec.shape = polygon_sample(rng);
  spec.boundary_data = grf_sample(laplace_circle_grf(), rng);
  spec.eval_seed = rng();
  return spec;
}

LaplaceSpec laplace_ellipse_spec(Rng& rng) {
  LaplaceSpec spec;
  spec.shape = ellipse_sample(rng);
  spec.boundary_data = grf_sample(laplace_circle_grf(), rng);
  spec.eval_seed = rng();
  return spec;
}

}  // namespace madrom::problems
