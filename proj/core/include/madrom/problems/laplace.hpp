#pragma once

#include <vector>

#include "madrom/problems/instance_spec.hpp"
#include "madrom/problems/problem.hpp"

namespace madrom::problems {

/// a0 + sum_k r^k (a_k cos k phi + b_k sin k phi). Throws std::invalid_argument
/// when r > 1 or r < 0.
double disk_harmonic_extension(const FourierSeries& h, double r, double phi);
/// Same function at Cartesian points (2 x N), via Re/Im of (x + i y)^k.
Eigen::ArrayXd disk_harmonic_extension(const FourierSeries& h, const Eigen::ArrayXXd& points);
/// Jet-valued form of the extension.
Field disk_harmonic_field(const FourierSeries& h);

/// u_xx + u_yy = 0 in a convex polygon or ellipse inside the unit disk, with
/// boundary data equal to the disk harmonic extension of h.
class LaplaceInstance final : public ProblemInstance {
 public:
  explicit LaplaceInstance(LaplaceSpec spec);

  Family family() const override { return Family::kLaplace; }
  int spatial_dim() const override { return 2; }
  std::optional<Eigen::VectorXd> descriptor() const override { return std::nullopt; }
  std::vector<int> residual_order() const override { return {2, 2}; }
  /// Rejection sampling in the bounding box.
  Eigen::ArrayXXd sample_interior(Rng& rng, Eigen::Index n) const override;
  /// Uniform by arc length along the boundary.
  Eigen::ArrayXXd sample_boundary(Rng& rng, Eigen::Index n) const override;
  std::vector<diff::NodeId> residual(diff::Graph& g, std::span<const diff::Jet2> u,
                                     const Eigen::ArrayXXd& points) const override;
  std::vector<diff::NodeId> boundary(diff::Graph& g, std::span<const diff::NodeId> u,
                                     const Eigen::ArrayXXd& points) const override;
  Eigen::ArrayXd reference(const Eigen::ArrayXXd& points) const override;
  const EvalSet& evaluation_set() const override { return eval_; }
  std::optional<Field> analytic_field() const override;
  const InstanceSpec& spec() const override { return wrapped_; }

  bool contains(const Eigen::Vector2d& p) const;
  bool is_ellipse() const { return std::holds_alternative<Ellipse>(spec_.shape); }

 private:
  LaplaceSpec spec_;
  InstanceSpec wrapped_;
  Eigen::Vector2d box_lo_, box_hi_;
  // Ellipse boundary: cumulative arc length over a uniform parameter grid.
  std::vector<double> arc_;
  EvalSet eval_;
};

std::shared_ptr<const LaplaceInstance> laplace_instance(const ConvexPolygon& poly,
                                                        const FourierSeries& h,
                                                        std::uint64_t eval_seed = 0);
std::shared_ptr<const LaplaceInstance> laplace_instance(const Ellipse& ellipse,
                                                        const FourierSeries& h,
                                                        std::uint64_t eval_seed = 0);

/// Random polygon (or ellipse) domain with GRF boundary data on the circle.
LaplaceSpec laplace_polygon_spec(Rng& rng);
LaplaceSpec laplace_ellipse_spec(Rng& rng);

}  // namespace madrom::problems
