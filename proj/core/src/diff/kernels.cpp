#include "madrom/diff/kernels.hpp"

#include <cassert>
#include <cmath>

namespace madrom::diff {

void fixed_order_matmul(const Eigen::Ref<const Eigen::MatrixXd>& a,
                        const Eigen::Ref<const Eigen::MatrixXd>& b,
                        Eigen::Ref<Eigen::MatrixXd> c) {
  assert(a.cols() == b.rows());
  assert(c.rows() == a.rows() && c.cols() == b.cols());
  const Eigen::Index m = a.rows();
  const Eigen::Index k = a.cols();
  const Eigen::Index n = b.cols();
  if (k == 0) {
    c.setZero();
    return;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    double* out = c.col(j).data();
    const double* bj = b.col(j).data();
    const double* a0 = a.col(0).data();
    const double s0 = bj[0];
    for (Eigen::Index i = 0; i < m; ++i) out[i] = a0[i] * s0;
    for (Eigen::Index p = 1; p < k; ++p) {
      const double* ap = a.col(p).data();
      const double s = bj[p];
      for (Eigen::Index i = 0; i < m; ++i) out[i] += ap[i] * s;
    }
  }
}

double kernel_sin(double v) {
  double s = 0.0;
  double c = 0.0;
  ::sincos(v, &s, &c);
  return s;
}

double kernel_cos(double v) {
  double s = 0.0;
  double c = 0.0;
  ::sincos(v, &s, &c);
  return c;
}

}  // namespace madrom::diff
