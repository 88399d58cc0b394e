#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "madrom/diff/graph.hpp"
#include "madrom/diff/jet.hpp"

namespace madrom::problems {

using Rng = std::mt19937_64;

enum class Family : std::uint8_t { kOde = 1, kBurgers = 2, kLaplace = 3 };

const char* family_name(Family f);
/// Parses "ode", "burgers" or "laplace"; throws std::invalid_argument otherwise.
Family parse_family(const std::string& name);

/// A differentiable candidate solution: coordinate jets in, one output jet per
/// solution component out.
using Field = std::function<std::vector<diff::Jet2>(diff::Graph&, std::span<const diff::Jet2>)>;

/// Points (spatial_dim x N) and reference values at those points.
struct EvalSet {
  Eigen::ArrayXXd points;
  Eigen::ArrayXd values;
};

struct InstanceSpec;

/// One member of a parametric PDE family: residual and boundary operators,
/// samplers for collocation points, and a reference solution.
class ProblemInstance {
 public:
  virtual ~ProblemInstance() = default;

  virtual Family family() const = 0;
  virtual int spatial_dim() const = 0;
  /// Vector used for nearest-neighbour latent initialization; empty for
  /// heterogeneous families with no natural distance.
  virtual std::optional<Eigen::VectorXd> descriptor() const = 0;
  /// Derivative order needed per coordinate by residual().
  virtual std::vector<int> residual_order() const = 0;

  virtual Eigen::ArrayXXd sample_interior(Rng& rng, Eigen::Index n) const = 0;
  virtual Eigen::ArrayXXd sample_boundary(Rng& rng, Eigen::Index n) const = 0;

  /// Residual components (each 1 x B) of the solution jets at `points`.
  virtual std::vector<diff::NodeId> residual(diff::Graph& g, std::span<const diff::Jet2> u,
                                             const Eigen::ArrayXXd& points) const = 0;
  /// Boundary mismatch components (each 1 x B) of solution values at `points`.
  virtual std::vector<diff::NodeId> boundary(diff::Graph& g, std::span<const diff::NodeId> u,
                                             const Eigen::ArrayXXd& points) const = 0;

  /// Reference solution values at arbitrary points of the closed domain.
  virtual Eigen::ArrayXd reference(const Eigen::ArrayXXd& points) const = 0;
  /// Fixed evaluation points with their reference values.
  virtual const EvalSet& evaluation_set() const = 0;
  /// Exact solution as a jet-valued field, when one is available in closed form.
  virtual std::optional<Field> analytic_field() const { return std::nullopt; }

  /// Serializable description from which the instance can be rebuilt.
  virtual const InstanceSpec& spec() const = 0;
};

using InstancePtr = std::shared_ptr<const ProblemInstance>;

}  // namespace madrom::problems
