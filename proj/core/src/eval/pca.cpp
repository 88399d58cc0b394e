#include "madrom/eval/pca.hpp"

#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace madrom::eval {

ManifoldProjection pca_project(const Eigen::MatrixXd& samples) {
  if (samples.rows() < 3) throw std::invalid_argument("pca_project: need at least three samples");
  if (!samples.allFinite()) throw std::invalid_argument("pca_project: non-finite samples");
  ManifoldProjection out;
  out.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - out.mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(samples.rows() - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("pca_project: eigensolver failed");
  const Eigen::Index dim = cov.rows();
  out.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  const double trace = out.eigenvalues.sum();
  const double tol = 1e-12 * std::max(trace, 1e-300);

  out.components = Eigen::MatrixXd::Zero(dim, 2);
  out.explained.setZero();
  int kept = 0;
  for (int c = 0; c < 2 && c < dim; ++c) {
    if (out.eigenvalues[c] <= tol) break;
    Eigen::VectorXd v = vectors.col(c);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v[i]) > 1e-14) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    out.components.col(c) = v;
    out.explained[c] = out.eigenvalues[c] / trace;
    ++kept;
  }
  out.rank_deficient = kept < 2;
  out.coords = centered * out.components;
  return out;
}

}  // namespace madrom::eval
