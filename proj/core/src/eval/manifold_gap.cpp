#include "madrom/eval/manifold_gap.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "madrom/eval/metrics.hpp"
#include "madrom/problems/problem.hpp"
#include "madrom/training/adam.hpp"

namespace madrom::eval {

using diff::Graph;
using diff::NodeId;

namespace {

double gap_of(const net::NetworkWeights& w, const Eigen::ArrayXXd& grid, const Eigen::ArrayXd& target,
              const Eigen::VectorXd& z) {
  const Eigen::ArrayXd pred = net::forward(w, grid, z).row(0).transpose();
  return relative_l2({pred.data(), static_cast<std::size_t>(pred.size())},
                     {target.data(), static_cast<std::size_t>(target.size())});
}

void project(Eigen::VectorXd& z, double radius) {
  const double norm = z.norm();
  if (norm > radius) z *= radius / norm;
}

}  // namespace

GapResult empirical_manifold_gap(const net::NetworkWeights& w, const Eigen::ArrayXXd& grid,
                                 const Eigen::ArrayXd& target, const GapOptions& options) {
  if (grid.cols() != target.size()) throw std::invalid_argument("manifold gap: grid and target sizes differ");
  if (options.iterations < 0 || !(options.lr > 0.0) || !(options.radius > 0.0)) {
    throw std::invalid_argument("manifold gap: invalid options");
  }
  const int n = w.config().latent_dim;
  GapResult out;
  if (n == 0) {
    out.latent = Eigen::VectorXd();
    out.gap = gap_of(w, grid, target, out.latent);
    return out;
  }
  const double target_sq = target.square().sum();
  if (!(target_sq > 0.0)) throw std::invalid_argument("manifold gap: target has zero norm");

  problems::Rng rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (int k = 0; k < n; ++k) z[k] = 0.01 * normal(rng);
  project(z, options.radius);

  train::AdamState adam(n);
  out.latent = z;
  out.gap = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= options.iterations; ++it) {
    Graph g;
    const net::BoundNetwork bound = net::bind(g, w, z, net::Trainable::kLatent);
    const std::vector<int> zeros(static_cast<std::size_t>(grid.rows()), 0);
    const auto coords = net::lift_points(g, grid, zeros);
    const auto u = net::forward_with_jets(g, bound, coords);
    const NodeId diff = g.sub(u[0].val, g.constant(diff::Block(target.transpose())));
    const NodeId loss = g.scale(g.sum(g.mul(diff, diff)), 1.0 / target_sq);
    const double gap = std::sqrt(g.scalar(loss));
    if (gap < out.gap) {
      out.gap = gap;
      out.latent = z;
    }
    out.history.push_back(out.gap);
    if (it == options.iterations) break;
    const Eigen::VectorXd grad = net::latent_gradient(g.backward(loss), bound);
    train::adam_step(adam, {z.data(), static_cast<std::size_t>(n)}, {grad.data(), static_cast<std::size_t>(n)},
                     options.lr);
    project(z, options.radius);
  }
  return out;
}

std::vector<GapResult> empirical_manifold_gaps(const net::NetworkWeights& w, const Eigen::ArrayXXd& grid,
                                               const Eigen::MatrixXd& targets, const GapOptions& options) {
  std::vector<GapResult> out;
  for (Eigen::Index r = 0; r < targets.rows(); ++r) {
    out.push_back(empirical_manifold_gap(w, grid, targets.row(r).transpose().array(), options));
  }
  return out;
}

}  // namespace madrom::eval
