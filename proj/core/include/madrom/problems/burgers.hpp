#pragma once

#include <mutex>

#include "madrom/problems/burgers_reference.hpp"
#include "madrom/problems/instance_spec.hpp"
#include "madrom/problems/problem.hpp"

namespace madrom::problems {

inline constexpr int kBurgersDescriptorPoints = 128;

/// u_t + u u_x - nu u_xx = 0 on (0, 1) x (0, 1], periodic in x, u(x, 0) = u0(x).
/// Coordinates are (x, t). The reference field is computed on first use.
class BurgersInstance final : public ProblemInstance {
 public:
  explicit BurgersInstance(BurgersSpec spec);

  double nu() const { return spec_.nu; }
  const FourierSeries& initial_condition() const { return spec_.u0; }

  Family family() const override { return Family::kBurgers; }
  int spatial_dim() const override { return 2; }
  /// u0 on 128 uniform points of [0, 1), with nu appended when heterogeneous.
  std::optional<Eigen::VectorXd> descriptor() const override { return descriptor_; }
  std::vector<int> residual_order() const override { return {2, 1}; }
  /// x uniform in [0, 1), t uniform in (0, 1].
  Eigen::ArrayXXd sample_interior(Rng& rng, Eigen::Index n) const override;
  /// x uniform in [0, 1), t = 0.
  Eigen::ArrayXXd sample_boundary(Rng& rng, Eigen::Index n) const override;
  std::vector<diff::NodeId> residual(diff::Graph& g, std::span<const diff::Jet2> u,
                                     const Eigen::ArrayXXd& points) const override;
  std::vector<diff::NodeId> boundary(diff::Graph& g, std::span<const diff::NodeId> u,
                                     const Eigen::ArrayXXd& points) const override;
  /// Trigonometric interpolation in x, linear in t between recorded slices.
  Eigen::ArrayXd reference(const Eigen::ArrayXXd& points) const override;
  /// Reference mesh subsampled by the configured strides (last slice kept).
  const EvalSet& evaluation_set() const override;
  const InstanceSpec& spec() const override { return wrapped_; }

  const SpaceTimeField& reference_field() const;

 private:
  void solve() const;

  BurgersSpec spec_;
  InstanceSpec wrapped_;
  Eigen::VectorXd descriptor_;
  mutable std::once_flag solved_;
  mutable SpaceTimeField field_;
  mutable Eigen::ArrayXXcd spectra_;  // nt x (nx/2 + 1), normalized
  mutable EvalSet eval_;
};

std::shared_ptr<const BurgersInstance> burgers_instance(const FourierSeries& u0, double nu);

/// u0 from `law`; nu fixed, or 10^U(-3, -1) when heterogeneous.
BurgersSpec burgers_spec_sample(Rng& rng, const GrfSpec& law, double nu, bool heterogeneous);

}  // namespace madrom::problems
