#pragma once

#include <Eigen/Core>

#include "madrom/diff/graph.hpp"
#include "madrom/diff/jet.hpp"

namespace madrom::problems::detail {

/// Lane node, or an explicit zero block shaped like the jet value when the
/// lane is a structural zero.
inline diff::NodeId lane_or_zero(diff::Graph& g, const diff::Jet2& u, diff::NodeId lane) {
  if (lane.valid()) return lane;
  const auto& v = g.value(u.val);
  return g.constant(diff::Block::Zero(v.rows(), v.cols()));
}

inline diff::NodeId row_constant(diff::Graph& g, const Eigen::ArrayXd& values) {
  return g.constant(diff::Block(values.transpose()));
}

}  // namespace madrom::problems::detail
