#pragma once

#include <Eigen/Core>

namespace madrom::diff {

/// C = A * B with a fixed accumulation order: every output entry is summed
/// over the inner index in ascending order, independent of how many columns
/// B has. Batched and chunked evaluations therefore agree bit for bit.
void fixed_order_matmul(const Eigen::Ref<const Eigen::MatrixXd>& a,
                        const Eigen::Ref<const Eigen::MatrixXd>& b,
                        Eigen::Ref<Eigen::MatrixXd> c);

/// Sine and cosine used on every value path. Both go through sincos so that a
/// value computed alone matches the one computed as part of a pair bit for bit.
double kernel_sin(double v);
double kernel_cos(double v);

}  // namespace madrom::diff
