#pragma once

#include <Eigen/Core>

namespace madrom::eval {

struct ManifoldProjection {
  Eigen::MatrixXd coords;          // samples x 2
  Eigen::Vector2d explained;       // variance fractions of the two components
  Eigen::MatrixXd components;      // grid x 2, unit columns
  Eigen::VectorXd mean;            // grid
  Eigen::VectorXd eigenvalues;     // all covariance eigenvalues, descending
  bool rank_deficient = false;     // fewer than two nonzero eigenvalues
};

/// Rows of `samples` are functions on a shared grid. Mean-centers, takes the
/// top two covariance eigenvectors (first nonzero entry made positive) and
/// projects. Requires at least three samples.
ManifoldProjection pca_project(const Eigen::MatrixXd& samples);

}  // namespace madrom::eval
