#include "madrom/diff/jet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace madrom::diff {

namespace {

bool is_zero(NodeId id) { return !id.valid(); }

void check_dims(const Jet2& a, const Jet2& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("jet dimension mismatch");
}

Jet2 shell(const Jet2& a) {
  Jet2 out;
  out.d1.assign(a.d1.size(), NodeId());
  out.d2.assign(a.d2.size(), NodeId());
  out.order = a.order;
  return out;
}

Jet2 shell(const Jet2& a, const Jet2& b) {
  Jet2 out = shell(a);
  for (std::size_t k = 0; k < out.order.size(); ++k) {
    out.order[k] = std::min(a.order[k], b.order[k]);
  }
  return out;
}

// Zero-aware helpers: an invalid id stands for an exact zero.
NodeId add_z(Graph& g, NodeId a, NodeId b) {
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  return g.add(a, b);
}

NodeId sub_z(Graph& g, NodeId a, NodeId b) {
  if (is_zero(b)) return a;
  if (is_zero(a)) return g.neg(b);
  return g.sub(a, b);
}

NodeId mul_z(Graph& g, NodeId a, NodeId b) {
  if (is_zero(a) || is_zero(b)) return NodeId();
  return g.mul(a, b);
}

// Chain rule for y = f(a) given f'(a) and f''(a) as nodes:
//   d1 = f' a1,   d2 = f'' a1^2 + f' a2.
// A null `fpp` means f'' == 0 (linear maps).
Jet2 chain(Graph& g, const Jet2& a, NodeId value, NodeId fp, NodeId fpp) {
  Jet2 out = shell(a);
  out.val = value;
  for (int k = 0; k < a.dim(); ++k) {
    if (a.order[k] >= 1) out.d1[k] = mul_z(g, fp, a.d1[k]);
    if (a.order[k] >= 2) {
      NodeId curvature = is_zero(a.d1[k]) || is_zero(fpp)
                             ? NodeId()
                             : g.mul(fpp, g.mul(a.d1[k], a.d1[k]));
      out.d2[k] = add_z(g, curvature, mul_z(g, fp, a.d2[k]));
    }
  }
  return out;
}

}  // namespace

Block lane_value(const Graph& g, const Jet2& a, NodeId lane) {
  if (lane.valid()) return g.value(lane);
  const Block& v = g.value(a.val);
  return Block::Zero(v.rows(), v.cols());
}

Jet2 lift_node(Graph& /*g*/, NodeId value, int d) {
  if (d < 0) throw std::invalid_argument("jet dimension must be >= 0");
  Jet2 out;
  out.val = value;
  out.d1.assign(static_cast<std::size_t>(d), NodeId());
  out.d2.assign(static_cast<std::size_t>(d), NodeId());
  out.order.assign(static_cast<std::size_t>(d), 2);
  return out;
}

Jet2 lift_constant(Graph& g, double c, int d) {
  if (!std::isfinite(c)) throw std::invalid_argument("lift_constant: value must be finite");
  return lift_node(g, g.constant(c), d);
}

Jet2 lift_constant(Graph& g, Block c, int d) {
  return lift_node(g, g.constant(std::move(c)), d);
}

Jet2 lift_coordinate(Graph& g, Block x, int k, int d, int order) {
  if (k < 0 || k >= d) throw std::invalid_argument("lift_coordinate: coordinate index out of range");
  if (order < 0 || order > 2) throw std::invalid_argument("lift_coordinate: order must be 0, 1 or 2");
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  Jet2 out = lift_node(g, g.constant(std::move(x)), d);
  out.order[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(order);
  if (order >= 1) out.d1[static_cast<std::size_t>(k)] = g.constant(Block::Ones(rows, cols));
  return out;
}

Jet2 lift_coordinate(Graph& g, double x, int k, int d, int order) {
  return lift_coordinate(g, Block::Constant(1, 1, x), k, d, order);
}

Jet2 jet_add(Graph& g, const Jet2& a, const Jet2& b) {
  check_dims(a, b);
  Jet2 out = shell(a, b);
  out.val = g.add(a.val, b.val);
  for (int k = 0; k < a.dim(); ++k) {
    if (out.order[k] >= 1) out.d1[k] = add_z(g, a.d1[k], b.d1[k]);
    if (out.order[k] >= 2) out.d2[k] = add_z(g, a.d2[k], b.d2[k]);
  }
  return out;
}

Jet2 jet_sub(Graph& g, const Jet2& a, const Jet2& b) {
  check_dims(a, b);
  Jet2 out = shell(a, b);
  out.val = g.sub(a.val, b.val);
  for (int k = 0; k < a.dim(); ++k) {
    if (out.order[k] >= 1) out.d1[k] = sub_z(g, a.d1[k], b.d1[k]);
    if (out.order[k] >= 2) out.d2[k] = sub_z(g, a.d2[k], b.d2[k]);
  }
  return out;
}

Jet2 jet_mul(Graph& g, const Jet2& a, const Jet2& b) {
  check_dims(a, b);
  Jet2 out = shell(a, b);
  out.val = g.mul(a.val, b.val);
  for (int k = 0; k < a.dim(); ++k) {
    if (out.order[k] >= 1) {
      out.d1[k] = add_z(g, mul_z(g, a.d1[k], b.val), mul_z(g, a.val, b.d1[k]));
    }
    if (out.order[k] >= 2) {
      // a2 b + 2 a1 b1 + a b2
      NodeId cross = mul_z(g, a.d1[k], b.d1[k]);
      if (!is_zero(cross)) cross = g.scale(cross, 2.0);
      NodeId lhs = mul_z(g, a.d2[k], b.val);
      NodeId rhs = mul_z(g, a.val, b.d2[k]);
      out.d2[k] = add_z(g, add_z(g, lhs, cross), rhs);
    }
  }
  return out;
}

Jet2 jet_div(Graph& g, const Jet2& a, const Jet2& b) {
  return jet_mul(g, a, jet_reciprocal(g, b));
}

Jet2 jet_neg(Graph& g, const Jet2& a) {
  Jet2 out = shell(a);
  out.val = g.neg(a.val);
  for (int k = 0; k < a.dim(); ++k) {
    if (a.order[k] >= 1 && !is_zero(a.d1[k])) out.d1[k] = g.neg(a.d1[k]);
    if (a.order[k] >= 2 && !is_zero(a.d2[k])) out.d2[k] = g.neg(a.d2[k]);
  }
  return out;
}

Jet2 jet_scale(Graph& g, const Jet2& a, double factor) {
  Jet2 out = shell(a);
  out.val = g.scale(a.val, factor);
  for (int k = 0; k < a.dim(); ++k) {
    if (a.order[k] >= 1 && !is_zero(a.d1[k])) out.d1[k] = g.scale(a.d1[k], factor);
    if (a.order[k] >= 2 && !is_zero(a.d2[k])) out.d2[k] = g.scale(a.d2[k], factor);
  }
  return out;
}

Jet2 jet_sin(Graph& g, const Jet2& a) {
  bool derivatives = false;
  for (int k = 0; k < a.dim(); ++k) derivatives = derivatives || (a.order[k] >= 1 && a.d1[k].valid());
  if (!derivatives) {
    Jet2 out = shell(a);
    out.val = g.sin(a.val);
    return out;
  }
  auto [s, c] = g.sincos(a.val);
  // d2 = c a2 - s a1^2, written without an explicit neg node.
  Jet2 out = shell(a);
  out.val = s;
  for (int k = 0; k < a.dim(); ++k) {
    if (a.order[k] >= 1) out.d1[k] = mul_z(g, c, a.d1[k]);
    if (a.order[k] >= 2) {
      NodeId curvature = is_zero(a.d1[k]) ? NodeId() : g.mul(s, g.mul(a.d1[k], a.d1[k]));
      out.d2[k] = sub_z(g, mul_z(g, c, a.d2[k]), curvature);
    }
  }
  return out;
}

Jet2 jet_cos(Graph& g, const Jet2& a) {
  auto [s, c] = g.sincos(a.val);
  return chain(g, a, c, g.neg(s), g.neg(c));
}

Jet2 jet_exp(Graph& g, const Jet2& a) {
  NodeId e = g.exp(a.val);
  return chain(g, a, e, e, e);
}

Jet2 jet_pow(Graph& g, const Jet2& a, int exponent) {
  if (exponent < 0) throw std::invalid_argument("jet_pow: exponent must be >= 0");
  NodeId value = g.pow(a.val, exponent);
  if (exponent == 0) return lift_node(g, value, a.dim());
  NodeId fp = g.scale(g.pow(a.val, exponent - 1), exponent);
  NodeId fpp = exponent >= 2
                   ? g.scale(g.pow(a.val, exponent - 2), static_cast<double>(exponent) * (exponent - 1))
                   : NodeId();
  return chain(g, a, value, fp, fpp);
}

Jet2 jet_reciprocal(Graph& g, const Jet2& a) {
  NodeId r = g.reciprocal(a.val);
  NodeId r2 = g.mul(r, r);
  NodeId fp = g.neg(r2);
  NodeId fpp = g.scale(g.mul(r2, r), 2.0);
  return chain(g, a, r, fp, fpp);
}

Jet2 jet_arith(Graph& g, JetOp op, const Jet2& a, const Jet2* b) {
  const bool binary = op == JetOp::kAdd || op == JetOp::kSub || op == JetOp::kMul || op == JetOp::kDiv;
  if (binary && b == nullptr) throw std::invalid_argument("jet_arith: binary op needs two operands");
  if (!binary && b != nullptr) throw std::invalid_argument("jet_arith: unary op takes one operand");
  switch (op) {
    case JetOp::kAdd: return jet_add(g, a, *b);
    case JetOp::kSub: return jet_sub(g, a, *b);
    case JetOp::kMul: return jet_mul(g, a, *b);
    case JetOp::kDiv: return jet_div(g, a, *b);
    case JetOp::kNeg: return jet_neg(g, a);
    case JetOp::kSin: return jet_sin(g, a);
    case JetOp::kCos: return jet_cos(g, a);
    case JetOp::kExp: return jet_exp(g, a);
    case JetOp::kReciprocal: return jet_reciprocal(g, a);
  }
  throw std::invalid_argument("jet_arith: unsupported op tag");
}

Jet2 jet_matmul(Graph& g, NodeId w, const Jet2& a) {
  Jet2 out = shell(a);
  out.val = g.matmul(w, a.val);
  for (int k = 0; k < a.dim(); ++k) {
    if (a.order[k] >= 1 && !is_zero(a.d1[k])) out.d1[k] = g.matmul(w, a.d1[k]);
    if (a.order[k] >= 2 && !is_zero(a.d2[k])) out.d2[k] = g.matmul(w, a.d2[k]);
  }
  return out;
}

Jet2 jet_add_node(Graph& g, const Jet2& a, NodeId c) {
  Jet2 out = a;
  out.val = g.add(a.val, c);
  return out;
}

Jet2 jet_concat_rows(Graph& g, std::span<const Jet2> parts) {
  if (parts.empty()) throw std::invalid_argument("jet_concat_rows: no parts");
  const int d = parts[0].dim();
  Jet2 out = shell(parts[0]);
  for (const Jet2& p : parts) {
    check_dims(parts[0], p);
    for (int k = 0; k < d; ++k) out.order[k] = std::min(out.order[k], p.order[k]);
  }
  auto gather = [&](auto lane_of) {
    std::vector<NodeId> ids;
    bool any = false;
    for (const Jet2& p : parts) {
      NodeId id = lane_of(p);
      any = any || id.valid();
      ids.push_back(id);
    }
    if (!any) return NodeId();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!ids[i].valid()) ids[i] = g.constant(lane_value(g, parts[i], NodeId()));
    }
    return g.concat_rows(ids);
  };
  std::vector<NodeId> vals;
  for (const Jet2& p : parts) vals.push_back(p.val);
  out.val = g.concat_rows(vals);
  for (int k = 0; k < d; ++k) {
    if (out.order[k] >= 1) out.d1[k] = gather([k](const Jet2& p) { return p.d1[k]; });
    if (out.order[k] >= 2) out.d2[k] = gather([k](const Jet2& p) { return p.d2[k]; });
  }
  return out;
}

Jet2 jet_slice_rows(Graph& g, const Jet2& a, Eigen::Index start, Eigen::Index count) {
  Jet2 out = shell(a);
  out.val = g.slice_rows(a.val, start, count);
  for (int k = 0; k < a.dim(); ++k) {
    if (a.order[k] >= 1 && !is_zero(a.d1[k])) out.d1[k] = g.slice_rows(a.d1[k], start, count);
    if (a.order[k] >= 2 && !is_zero(a.d2[k])) out.d2[k] = g.slice_rows(a.d2[k], start, count);
  }
  return out;
}

}  // namespace madrom::diff
