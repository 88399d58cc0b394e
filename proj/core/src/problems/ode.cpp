#include "madrom/problems/ode.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "detail.hpp"

namespace madrom::problems {

using diff::Graph;
using diff::Jet2;
using diff::NodeId;

namespace {
constexpr double kPi = std::numbers::pi;
}

OdeInstance::OdeInstance(OdeSpec spec) : spec_(spec), wrapped_{spec} {
  if (!std::isfinite(spec_.eta)) throw std::invalid_argument("ode: eta must be finite");
  if (spec_.eval_points < 2) throw std::invalid_argument("ode: need at least 2 evaluation points");
  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(spec_.eval_points, -kPi, kPi);
  eval_.points = x.transpose();
  eval_.values = reference(eval_.points);
}

std::optional<Eigen::VectorXd> OdeInstance::descriptor() const {
  return Eigen::VectorXd::Constant(1, spec_.eta);
}

Eigen::ArrayXXd OdeInstance::sample_interior(Rng& rng, Eigen::Index n) const {
  std::uniform_real_distribution<double> uniform(-kPi, kPi);
  Eigen::ArrayXXd out(1, n);
  for (Eigen::Index i = 0; i < n; ++i) out(0, i) = uniform(rng);
  return out;
}

Eigen::ArrayXXd OdeInstance::sample_boundary(Rng& /*rng*/, Eigen::Index n) const {
  Eigen::ArrayXXd out(1, n);
  for (Eigen::Index i = 0; i < n; ++i) out(0, i) = i % 2 == 0 ? -kPi : kPi;
  return out;
}

std::vector<NodeId> OdeInstance::residual(Graph& g, std::span<const Jet2> u,
                                          const Eigen::ArrayXXd& points) const {
  const Eigen::ArrayXd s = points.row(0).transpose() - spec_.eta;
  const Eigen::ArrayXd rhs = 2.0 * s * (s * s).unaryExpr([](double v) { return std::cos(v); });
  return {g.sub(detail::lane_or_zero(g, u[0], u[0].d1[0]), detail::row_constant(g, rhs))};
}

std::vector<NodeId> OdeInstance::boundary(Graph& g, std::span<const NodeId> u,
                                          const Eigen::ArrayXXd& points) const {
  return {g.sub(u[0], detail::row_constant(g, reference(points)))};
}

Eigen::ArrayXd OdeInstance::reference(const Eigen::ArrayXXd& points) const {
  const Eigen::ArrayXd s = points.row(0).transpose() - spec_.eta;
  return (s * s).unaryExpr([](double v) { return std::sin(v); });
}

std::optional<Field> OdeInstance::analytic_field() const {
  const double eta = spec_.eta;
  return Field([eta](Graph& g, std::span<const Jet2> x) {
    const Jet2 s = diff::jet_add_node(g, x[0], g.constant(-eta));
    return std::vector<Jet2>{diff::jet_sin(g, diff::jet_mul(g, s, s))};
  });
}

std::shared_ptr<const OdeInstance> ode_instance(double eta) {
  return std::make_shared<const OdeInstance>(OdeSpec{eta});
}

std::vector<double> ode_eta_grid(int count, double lo, double hi) {
  if (count < 1) throw std::invalid_argument("ode_eta_grid: count must be >= 1");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  }
  return out;
}

}  // namespace madrom::problems
