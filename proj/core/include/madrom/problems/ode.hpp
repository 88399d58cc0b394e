#pragma once

#include "madrom/problems/instance_spec.hpp"
#include "madrom/problems/problem.hpp"

namespace madrom::problems {

/// u' = 2 (x - eta) cos((x - eta)^2) on (-pi, pi) with u(+-pi) = sin((+-pi - eta)^2).
/// The exact solution is sin((x - eta)^2).
class OdeInstance final : public ProblemInstance {
 public:
  explicit OdeInstance(OdeSpec spec);

  double eta() const { return spec_.eta; }

  Family family() const override { return Family::kOde; }
  int spatial_dim() const override { return 1; }
  std::optional<Eigen::VectorXd> descriptor() const override;
  std::vector<int> residual_order() const override { return {1}; }
  Eigen::ArrayXXd sample_interior(Rng& rng, Eigen::Index n) const override;
  /// Alternates -pi, pi, -pi, ...
  Eigen::ArrayXXd sample_boundary(Rng& rng, Eigen::Index n) const override;
  std::vector<diff::NodeId> residual(diff::Graph& g, std::span<const diff::Jet2> u,
                                     const Eigen::ArrayXXd& points) const override;
  std::vector<diff::NodeId> boundary(diff::Graph& g, std::span<const diff::NodeId> u,
                                     const Eigen::ArrayXXd& points) const override;
  Eigen::ArrayXd reference(const Eigen::ArrayXXd& points) const override;
  const EvalSet& evaluation_set() const override { return eval_; }
  std::optional<Field> analytic_field() const override;
  const InstanceSpec& spec() const override { return wrapped_; }

 private:
  OdeSpec spec_;
  InstanceSpec wrapped_;
  EvalSet eval_;
};

std::shared_ptr<const OdeInstance> ode_instance(double eta);

/// `count` equidistant parameters on [lo, hi], both ends included.
std::vector<double> ode_eta_grid(int count, double lo = 0.0, double hi = 2.0);

}  // namespace madrom::problems
