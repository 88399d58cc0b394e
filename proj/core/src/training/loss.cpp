#include "madrom/training/loss.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "madrom/errors.hpp"
#include "madrom/network/network.hpp"

namespace madrom::train {

using diff::Graph;
using diff::NodeId;

namespace {

void check_finite(const Graph& g, std::span<const NodeId> parts, const Eigen::ArrayXXd& points,
                  const char* what) {
  for (NodeId id : parts) {
    const auto& v = g.value(id);
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      if (v.col(c).allFinite()) continue;
      std::ostringstream os;
      os << "non-finite " << what << " at point (";
      for (Eigen::Index k = 0; k < points.rows(); ++k) os << (k ? ", " : "") << points(k, c);
      os << ")";
      throw NumericalError(os.str(), id.index());
    }
  }
}

NodeId power_sum(Graph& g, std::span<const NodeId> parts, double p) {
  NodeId total;
  for (NodeId id : parts) {
    const NodeId s = g.sum(g.abs_pow(id, p));
    total = total.valid() ? g.add(total, s) : s;
  }
  return total;
}

}  // namespace

LossNodes mc_physics_loss(Graph& g, const problems::ProblemInstance& instance, const problems::Field& u,
                          const Eigen::ArrayXXd& interior, const Eigen::ArrayXXd& boundary,
                          double boundary_weight, double p) {
  if (interior.cols() < 1 || boundary.cols() < 1) {
    throw std::invalid_argument("mc_physics_loss: batches must be nonempty");
  }
  const std::vector<int> order = instance.residual_order();
  const auto coords = net::lift_points(g, interior, order);
  const auto u_in = u(g, coords);
  const auto r = instance.residual(g, u_in, interior);
  check_finite(g, r, interior, "residual");

  const std::vector<int> zeros(order.size(), 0);
  const auto bcoords = net::lift_points(g, boundary, zeros);
  const auto u_bc = u(g, bcoords);
  std::vector<NodeId> values;
  for (const auto& jet : u_bc) values.push_back(jet.val);
  const auto b = instance.boundary(g, values, boundary);
  check_finite(g, b, boundary, "boundary mismatch");

  LossNodes out;
  out.residual = g.scale(power_sum(g, r, p), 1.0 / static_cast<double>(interior.cols()));
  out.boundary = g.scale(power_sum(g, b, p), boundary_weight / static_cast<double>(boundary.cols()));
  out.total = g.add(out.residual, out.boundary);
  return out;
}

NodeId regularized_loss(Graph& g, NodeId physics, NodeId z, double penalty) {
  if (!z.valid()) return physics;
  return g.add(physics, g.scale(g.sum(g.mul(z, z)), penalty));
}

}  // namespace madrom::train
