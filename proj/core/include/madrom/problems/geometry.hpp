#pragma once

#include <vector>

#include <Eigen/Core>

#include "madrom/problems/problem.hpp"

namespace madrom::problems {

/// Convex polygon with vertices on the unit circle, counter-clockwise.
struct ConvexPolygon {
  std::vector<Eigen::Vector2d> vertices;

  /// Throws std::invalid_argument unless 3..10 vertices lie on the unit circle
  /// (within 1e-12) and every turn is strictly counter-clockwise.
  void validate() const;
  bool contains(const Eigen::Vector2d& p) const;
  double perimeter() const;

  friend bool operator==(const ConvexPolygon&, const ConvexPolygon&) = default;
};

/// k uniform in {3..10}, k sorted uniform angles on [0, 2 pi); draws with two
/// angles closer than 1e-3 rad (cyclically) are rejected and redrawn.
ConvexPolygon polygon_sample(Rng& rng);

struct Ellipse {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double semi_a = 0.5;
  double semi_b = 0.5;
  double rotation = 0.0;

  void validate() const;
  bool contains(const Eigen::Vector2d& p) const;
  Eigen::Vector2d point_at(double parameter) const;
  /// Largest distance from the origin over the boundary.
  double max_radius() const;

  friend bool operator==(const Ellipse&, const Ellipse&) = default;
};

/// Center uniform in the disk of radius 0.3, semi-axes uniform in [0.3, 0.6],
/// rotation uniform in [0, pi). Such ellipses always fit in the unit disk.
Ellipse ellipse_sample(Rng& rng);

}  // namespace madrom::problems
