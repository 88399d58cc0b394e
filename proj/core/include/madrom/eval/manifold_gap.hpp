#pragma once

#include <vector>

#include <Eigen/Core>

#include "madrom/network/network.hpp"

namespace madrom::eval {

struct GapOptions {
  int iterations = 2000;
  double lr = 1e-1;  // steps of this size suit a unit-ball search
  double radius = 1.0;
  std::uint64_t seed = 0;  // initial latent is seeded inside the ball
};

struct GapResult {
  double gap = 0.0;           // best relative L2 reached
  Eigen::VectorXd latent;     // argmin, ||latent|| <= radius
  std::vector<double> history;  // best-so-far per iteration
};

/// min over ||z|| <= radius of ||u(., z) - target|| / ||target|| on the grid
/// (d x N), by Adam on z with projection onto the ball after every step.
GapResult empirical_manifold_gap(const net::NetworkWeights& w, const Eigen::ArrayXXd& grid,
                                 const Eigen::ArrayXd& target, const GapOptions& options = {});

/// One gap per target (rows of `targets`).
std::vector<GapResult> empirical_manifold_gaps(const net::NetworkWeights& w, const Eigen::ArrayXXd& grid,
                                               const Eigen::MatrixXd& targets, const GapOptions& options = {});

}  // namespace madrom::eval
