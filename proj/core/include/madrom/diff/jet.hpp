#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "madrom/diff/graph.hpp"

namespace madrom::diff {

/// Second-order diagonal jet over d spatial coordinates, built from graph
/// nodes so that parameter gradients flow through every derivative lane.
///
/// `order[k]` is how far coordinate k is tracked (0, 1 or 2). A lane that is
/// tracked but holds an invalid NodeId is a structural zero. Lanes beyond
/// `order[k]` are not computed and must not be read.
struct Jet2 {
  NodeId val;
  std::vector<NodeId> d1;
  std::vector<NodeId> d2;
  std::vector<std::uint8_t> order;

  int dim() const { return static_cast<int>(d1.size()); }
};

enum class JetOp : std::uint8_t {
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kSin,
  kCos,
  kExp,
  kReciprocal,
};

/// Constant: zero first and second derivatives in all d coordinates.
Jet2 lift_constant(Graph& g, double c, int d);
Jet2 lift_constant(Graph& g, Block c, int d);
/// Wraps an existing node whose value does not depend on the coordinates.
Jet2 lift_node(Graph& g, NodeId value, int d);

/// Coordinate x_k: d1[k] = 1, everything else zero. `order` caps how far this
/// coordinate is tracked downstream.
Jet2 lift_coordinate(Graph& g, double x, int k, int d, int order = 2);
Jet2 lift_coordinate(Graph& g, Block x, int k, int d, int order = 2);

Jet2 jet_add(Graph& g, const Jet2& a, const Jet2& b);
Jet2 jet_sub(Graph& g, const Jet2& a, const Jet2& b);
Jet2 jet_mul(Graph& g, const Jet2& a, const Jet2& b);
Jet2 jet_div(Graph& g, const Jet2& a, const Jet2& b);
Jet2 jet_neg(Graph& g, const Jet2& a);
Jet2 jet_scale(Graph& g, const Jet2& a, double factor);
Jet2 jet_sin(Graph& g, const Jet2& a);
Jet2 jet_cos(Graph& g, const Jet2& a);
Jet2 jet_exp(Graph& g, const Jet2& a);
Jet2 jet_pow(Graph& g, const Jet2& a, int exponent);
Jet2 jet_reciprocal(Graph& g, const Jet2& a);

/// Tag-dispatched form. Unary tags require `b == nullptr`, binary tags a
/// non-null `b`; violations throw std::invalid_argument.
Jet2 jet_arith(Graph& g, JetOp op, const Jet2& a, const Jet2* b = nullptr);

/// Linear map W * a where W carries no coordinate dependence.
Jet2 jet_matmul(Graph& g, NodeId w, const Jet2& a);
/// a + c where c carries no coordinate dependence (bias, latent term).
Jet2 jet_add_node(Graph& g, const Jet2& a, NodeId c);
Jet2 jet_concat_rows(Graph& g, std::span<const Jet2> parts);
Jet2 jet_slice_rows(Graph& g, const Jet2& a, Eigen::Index start, Eigen::Index count);

/// Materialized value of a lane (zeros for structural-zero lanes).
Block lane_value(const Graph& g, const Jet2& a, NodeId lane);

}  // namespace madrom::diff
