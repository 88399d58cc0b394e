#include "madrom/problems/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace madrom::problems {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace

void ConvexPolygon::validate() const {
  const std::size_t k = vertices.size();
  if (k < 3 || k > 10) throw std::invalid_argument("polygon: need 3..10 vertices");
  for (const auto& v : vertices) {
    if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("polygon: vertices must lie on the unit circle");
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    const Eigen::Vector2d e0 = vertices[(i + 1) % k] - vertices[i];
    const Eigen::Vector2d e1 = vertices[(i + 2) % k] - vertices[(i + 1) % k];
    if (!(cross(e0, e1) > 0.0)) throw std::invalid_argument("polygon: not strictly convex");
  }
}

bool ConvexPolygon::contains(const Eigen::Vector2d& p) const {
  const std::size_t k = vertices.size();
  for (std::size_t i = 0; i < k; ++i) {
    const Eigen::Vector2d& a = vertices[i];
    const Eigen::Vector2d& b = vertices[(i + 1) % k];
    if (cross(b - a, p - a) < 0.0) return false;
  }
  return true;
}

double ConvexPolygon::perimeter() const {
  double total = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    total += (vertices[(i + 1) % vertices.size()] - vertices[i]).norm();
  }
  return total;
}

ConvexPolygon polygon_sample(Rng& rng) {
  std::uniform_int_distribution<int> count(3, 10);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  const int k = count(rng);
  for (;;) {
    std::vector<double> phi(static_cast<std::size_t>(k));
    for (double& p : phi) p = angle(rng);
    std::sort(phi.begin(), phi.end());
    bool degenerate = false;
    for (int i = 0; i < k; ++i) {
      const double next = i + 1 < k ? phi[static_cast<std::size_t>(i + 1)] : phi[0] + kTwoPi;
      if (next - phi[static_cast<std::size_t>(i)] < 1e-3) degenerate = true;
    }
    if (degenerate) continue;
    ConvexPolygon poly;
    for (double p : phi) poly.vertices.emplace_back(std::cos(p), std::sin(p));
    return poly;
  }
}

void Ellipse::validate() const {
  if (!center.allFinite() || !std::isfinite(rotation)) {
    throw std::invalid_argument("ellipse: non-finite parameters");
  }
  if (!(semi_a > 0.0) || !(semi_b > 0.0)) throw std::invalid_argument("ellipse: axes must be > 0");
  if (max_radius() > 1.0) throw std::invalid_argument("ellipse: must lie inside the unit disk");
}

bool Ellipse::contains(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d q = p - center;
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  const double u = (c * q.x() + s * q.y()) / semi_a;
  const double v = (-s * q.x() + c * q.y()) / semi_b;
  return u * u + v * v <= 1.0;
}

Eigen::Vector2d Ellipse::point_at(double t) const {
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  const double u = semi_a * std::cos(t);
  const double v = semi_b * std::sin(t);
  return center + Eigen::Vector2d(c * u - s * v, s * u + c * v);
}

double Ellipse::max_radius() const {
  // Coarse scan, then golden-section refinement around the best sample.
  constexpr int kScan = 720;
  int best = 0;
  double best_r = -1.0;
  for (int i = 0; i < kScan; ++i) {
    const double r = point_at(kTwoPi * i / kScan).norm();
    if (r > best_r) {
      best_r = r;
      best = i;
    }
  }
  double lo = kTwoPi * (best - 1) / kScan;
  double hi = kTwoPi * (best + 1) / kScan;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 80; ++it) {
    const double m1 = hi - ratio * (hi - lo);
    const double m2 = lo + ratio * (hi - lo);
    if (point_at(m1).norm() < point_at(m2).norm()) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return std::max(best_r, point_at(0.5 * (lo + hi)).norm());
}

Ellipse ellipse_sample(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Ellipse e;
  const double radius = 0.3 * std::sqrt(unit(rng));
  const double phi = kTwoPi * unit(rng);
  e.center = Eigen::Vector2d(radius * std::cos(phi), radius * std::sin(phi));
  e.semi_a = 0.3 + 0.3 * unit(rng);
  e.semi_b = 0.3 + 0.3 * unit(rng);
  e.rotation = std::numbers::pi * unit(rng);
  return e;
}

}  // namespace madrom::problems
