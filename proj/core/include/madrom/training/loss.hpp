#pragma once

#include <Eigen/Core>

#include "madrom/diff/graph.hpp"
#include "madrom/problems/problem.hpp"

namespace madrom::train {

struct LossNodes {
  diff::NodeId total;
  diff::NodeId residual;  // (1/M_r) sum |r|^p
  diff::NodeId boundary;  // (lambda_bc/M_bc) sum |b|^p
};

/// (1/M_r) sum |r|^p + (lambda_bc/M_bc) sum |b|^p for the field u on the given
/// interior (d x M_r) and boundary (d x M_bc) points. Throws NumericalError
/// naming a sample point when a residual or boundary value is not finite.
LossNodes mc_physics_loss(diff::Graph& g, const problems::ProblemInstance& instance,
                          const problems::Field& u, const Eigen::ArrayXXd& interior,
                          const Eigen::ArrayXXd& boundary, double boundary_weight, double p);

/// physics + penalty * ||z||^2. An invalid z (no latent) leaves physics as is.
diff::NodeId regularized_loss(diff::Graph& g, diff::NodeId physics, diff::NodeId z, double penalty);

}  // namespace madrom::train
