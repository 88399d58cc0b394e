#include "madrom/diff/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "madrom/diff/kernels.hpp"
#include "madrom/errors.hpp"

namespace madrom::diff {

namespace {

bool is_scalar(const Block& b) { return b.rows() == 1 && b.cols() == 1; }

std::string shape(const Block& b) {
  std::ostringstream os;
  os << b.rows() << "x" << b.cols();
  return os.str();
}

// Adjoint of a (possibly broadcast) operand: reduce when the operand was 1x1.
void accumulate(Block& slot, const Block& contribution, const Block& operand_value) {
  if (is_scalar(operand_value) && !is_scalar(contribution)) {
    const double s = contribution.sum();
    if (slot.size() == 0) {
      slot = Block::Constant(1, 1, s);
    } else {
      slot(0, 0) += s;
    }
    return;
  }
  if (slot.size() == 0) {
    slot = contribution;
  } else {
    slot += contribution;
  }
}

// Product of two blocks where either side may be 1x1.
Block broadcast_mul(const Block& a, const Block& b) {
  if (is_scalar(a) && !is_scalar(b)) return b * a(0, 0);
  if (is_scalar(b) && !is_scalar(a)) return a * b(0, 0);
  return a * b;
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::kConstant: return "constant";
    case Op::kParameter: return "parameter";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kNeg: return "neg";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kExp: return "exp";
    case Op::kPow: return "pow";
    case Op::kReciprocal: return "reciprocal";
    case Op::kAbsPow: return "abs_pow";
    case Op::kScale: return "scale";
    case Op::kSum: return "sum";
    case Op::kMatMul: return "matmul";
    case Op::kBroadcastCols: return "broadcast_cols";
    case Op::kConcatRows: return "concat_rows";
    case Op::kSliceRows: return "slice_rows";
  }
  return "unknown";
}

const Block* GradientMap::find(NodeId leaf) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), leaf,
                             [](const auto& e, NodeId id) { return e.first < id; });
  if (it == entries.end() || it->first != leaf) return nullptr;
  return &it->second;
}

NodeId Graph::push(Op op, std::vector<NodeId> inputs, Block value, double attr,
                   Eigen::Index iattr) {
  Node n;
  n.op = op;
  n.requires_grad = op == Op::kParameter;
  for (NodeId in : inputs) n.requires_grad = n.requires_grad || nodes_[in.index()].requires_grad;
  n.inputs = std::move(inputs);
  n.value = std::move(value);
  n.attr = attr;
  n.iattr = iattr;
  nodes_.push_back(std::move(n));
  return NodeId(static_cast<std::uint32_t>(nodes_.size() - 1));
}

const Graph::Node& Graph::node(NodeId id) const {
  if (!id.valid() || id.index() >= nodes_.size()) {
    throw std::out_of_range("graph node id out of range");
  }
  return nodes_[id.index()];
}

NodeId Graph::constant(double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("constant must be finite");
  return push(Op::kConstant, {}, Block::Constant(1, 1, c));
}

NodeId Graph::constant(Block value) {
  if (!value.allFinite()) throw std::invalid_argument("constant block must be finite");
  return push(Op::kConstant, {}, std::move(value));
}

NodeId Graph::parameter(Block value, std::int64_t tag) {
  if (!value.allFinite()) throw std::invalid_argument("parameter block must be finite");
  NodeId id = push(Op::kParameter, {}, std::move(value));
  nodes_.back().tag = tag;
  return id;
}

NodeId Graph::binary(Op op, NodeId a, NodeId b) {
  const Block& va = node(a).value;
  const Block& vb = node(b).value;
  const bool same = va.rows() == vb.rows() && va.cols() == vb.cols();
  if (!same && !is_scalar(va) && !is_scalar(vb)) {
    throw std::invalid_argument(std::string("shape mismatch in ") + op_name(op) + ": " +
                                shape(va) + " vs " + shape(vb));
  }
  Block out;
  switch (op) {
    case Op::kAdd:
      if (same) out = va + vb;
      else if (is_scalar(va)) out = vb + va(0, 0);
      else out = va + vb(0, 0);
      break;
    case Op::kSub:
      if (same) out = va - vb;
      else if (is_scalar(va)) out = va(0, 0) - vb;
      else out = va - vb(0, 0);
      break;
    case Op::kMul:
      out = broadcast_mul(va, vb);
      break;
    default:
      throw std::invalid_argument("not a binary op");
  }
  return push(op, {a, b}, std::move(out));
}

NodeId Graph::add(NodeId a, NodeId b) { return binary(Op::kAdd, a, b); }
NodeId Graph::sub(NodeId a, NodeId b) { return binary(Op::kSub, a, b); }
NodeId Graph::mul(NodeId a, NodeId b) { return binary(Op::kMul, a, b); }

NodeId Graph::neg(NodeId a) { return push(Op::kNeg, {a}, -node(a).value); }
NodeId Graph::sin(NodeId a) {
  return push(Op::kSin, {a}, node(a).value.unaryExpr([](double v) { return kernel_sin(v); }));
}

NodeId Graph::cos(NodeId a) {
  return push(Op::kCos, {a}, node(a).value.unaryExpr([](double v) { return kernel_cos(v); }));
}

std::pair<NodeId, NodeId> Graph::sincos(NodeId a) {
  const Block& v = node(a).value;
  Block s(v.rows(), v.cols());
  Block c(v.rows(), v.cols());
  const double* in = v.data();
  double* ps = s.data();
  double* pc = c.data();
  for (Eigen::Index i = 0; i < v.size(); ++i) ::sincos(in[i], ps + i, pc + i);
  NodeId sid = push(Op::kSin, {a}, std::move(s));
  NodeId cid = push(Op::kCos, {a}, std::move(c));
  nodes_[sid.index()].partner = cid.index();
  nodes_[cid.index()].partner = sid.index();
  return {sid, cid};
}
NodeId Graph::exp(NodeId a) { return push(Op::kExp, {a}, node(a).value.exp()); }

NodeId Graph::pow(NodeId a, int exponent) {
  if (exponent < 0) throw std::invalid_argument("pow exponent must be >= 0");
  const Block& v = node(a).value;
  Block out = Block::Ones(v.rows(), v.cols());
  for (int i = 0; i < exponent; ++i) out *= v;
  return push(Op::kPow, {a}, std::move(out), exponent);
}

NodeId Graph::reciprocal(NodeId a) {
  return push(Op::kReciprocal, {a}, node(a).value.inverse());
}

NodeId Graph::abs_pow(NodeId a, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("abs_pow exponent must be >= 1");
  const Block& v = node(a).value;
  Block out = p == 2.0 ? Block(v.square()) : Block(v.abs().pow(p));
  return push(Op::kAbsPow, {a}, std::move(out), p);
}

NodeId Graph::scale(NodeId a, double factor) {
  if (!std::isfinite(factor)) throw std::invalid_argument("scale factor must be finite");
  return push(Op::kScale, {a}, node(a).value * factor, factor);
}

NodeId Graph::sum(NodeId a) {
  return push(Op::kSum, {a}, Block::Constant(1, 1, node(a).value.sum()));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Block& va = node(a).value;
  const Block& vb = node(b).value;
  if (va.cols() != vb.rows()) {
    throw std::invalid_argument("shape mismatch in matmul: " + shape(va) + " vs " + shape(vb));
  }
  Block out(va.rows(), vb.cols());
  Eigen::Map<Eigen::MatrixXd> out_view(out.data(), out.rows(), out.cols());
  fixed_order_matmul(va.matrix(), vb.matrix(), out_view);
  return push(Op::kMatMul, {a, b}, std::move(out));
}

NodeId Graph::broadcast_cols(NodeId column, Eigen::Index cols) {
  const Block& v = node(column).value;
  if (v.cols() != 1) throw std::invalid_argument("broadcast_cols expects a column");
  return push(Op::kBroadcastCols, {column}, v.replicate(1, cols));
}

NodeId Graph::concat_rows(std::span<const NodeId> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows needs at least one part");
  const Eigen::Index cols = node(parts[0]).value.cols();
  Eigen::Index rows = 0;
  for (NodeId p : parts) {
    if (node(p).value.cols() != cols) throw std::invalid_argument("concat_rows column mismatch");
    rows += node(p).value.rows();
  }
  Block out(rows, cols);
  Eigen::Index r = 0;
  for (NodeId p : parts) {
    const Block& v = node(p).value;
    out.middleRows(r, v.rows()) = v;
    r += v.rows();
  }
  return push(Op::kConcatRows, std::vector<NodeId>(parts.begin(), parts.end()), std::move(out));
}

NodeId Graph::slice_rows(NodeId a, Eigen::Index start, Eigen::Index count) {
  const Block& v = node(a).value;
  if (start < 0 || count < 0 || start + count > v.rows()) {
    throw std::invalid_argument("slice_rows out of range");
  }
  return push(Op::kSliceRows, {a}, v.middleRows(start, count), 0.0, start);
}

const Block& Graph::value(NodeId id) const { return node(id).value; }

double Graph::scalar(NodeId id) const {
  const Block& v = node(id).value;
  if (!is_scalar(v)) throw std::invalid_argument("node is not a scalar");
  return v(0, 0);
}

Op Graph::op(NodeId id) const { return node(id).op; }
std::span<const NodeId> Graph::inputs(NodeId id) const { return node(id).inputs; }
std::int64_t Graph::tag(NodeId id) const { return node(id).tag; }
bool Graph::requires_grad(NodeId id) const { return node(id).requires_grad; }

std::vector<NodeId> Graph::parameters() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].op == Op::kParameter) out.emplace_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

GradientMap Graph::backward(NodeId root) const {
  const Node& r = node(root);
  if (!is_scalar(r.value)) throw std::invalid_argument("backward root must be 1x1");

  std::vector<Block> adj(root.index() + 1);
  adj[root.index()] = Block::Ones(1, 1);
  std::vector<char> reached(root.index() + 1, 0);
  reached[root.index()] = 1;

  for (std::int64_t i = root.index(); i >= 0; --i) {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!reached[i] || !n.requires_grad) continue;
    Block& g = adj[i];
    if (!g.allFinite()) {
      throw NumericalError(std::string("non-finite adjoint at node ") + std::to_string(i) +
                               " (" + op_name(n.op) + ")",
                           i);
    }
    auto want = [&](NodeId in) -> bool {
      if (!nodes_[in.index()].requires_grad) return false;
      reached[in.index()] = 1;
      return true;
    };
    auto in_value = [&](std::size_t k) -> const Block& { return nodes_[n.inputs[k].index()].value; };
    auto slot = [&](std::size_t k) -> Block& { return adj[n.inputs[k].index()]; };

    switch (n.op) {
      case Op::kConstant:
      case Op::kParameter:
        break;
      case Op::kAdd:
        if (want(n.inputs[0])) accumulate(slot(0), g, in_value(0));
        if (want(n.inputs[1])) accumulate(slot(1), g, in_value(1));
        break;
      case Op::kSub:
        if (want(n.inputs[0])) accumulate(slot(0), g, in_value(0));
        if (want(n.inputs[1])) accumulate(slot(1), -g, in_value(1));
        break;
      case Op::kMul:
        if (want(n.inputs[0])) accumulate(slot(0), broadcast_mul(g, in_value(1)), in_value(0));
        if (want(n.inputs[1])) accumulate(slot(1), broadcast_mul(g, in_value(0)), in_value(1));
        break;
      case Op::kNeg:
        if (want(n.inputs[0])) accumulate(slot(0), -g, in_value(0));
        break;
      case Op::kSin:
        if (want(n.inputs[0])) {
          if (n.partner != NodeId::kInvalid) {
            accumulate(slot(0), g * nodes_[n.partner].value, in_value(0));
          } else {
            accumulate(slot(0), g * in_value(0).unaryExpr([](double v) { return kernel_cos(v); }),
                       in_value(0));
          }
        }
        break;
      case Op::kCos:
        if (want(n.inputs[0])) {
          if (n.partner != NodeId::kInvalid) {
            accumulate(slot(0), -g * nodes_[n.partner].value, in_value(0));
          } else {
            accumulate(slot(0), -g * in_value(0).unaryExpr([](double v) { return kernel_sin(v); }),
                       in_value(0));
          }
        }
        break;
      case Op::kExp:
        if (want(n.inputs[0])) accumulate(slot(0), g * n.value, in_value(0));
        break;
      case Op::kPow:
        if (want(n.inputs[0])) {
          const int e = static_cast<int>(n.attr);
          const Block& v = in_value(0);
          Block d = Block::Constant(v.rows(), v.cols(), e == 0 ? 0.0 : static_cast<double>(e));
          for (int k = 0; k + 1 < e; ++k) d *= v;
          accumulate(slot(0), g * d, v);
        }
        break;
      case Op::kReciprocal:
        if (want(n.inputs[0])) accumulate(slot(0), -g * n.value.square(), in_value(0));
        break;
      case Op::kAbsPow:
        if (want(n.inputs[0])) {
          const Block& v = in_value(0);
          const double p = n.attr;
          Block d = p == 2.0 ? Block(2.0 * v)
                             : Block(p * v.abs().pow(p - 1.0) * v.sign());
          accumulate(slot(0), g * d, v);
        }
        break;
      case Op::kScale:
        if (want(n.inputs[0])) accumulate(slot(0), g * n.attr, in_value(0));
        break;
      case Op::kSum:
        if (want(n.inputs[0])) {
          const Block& v = in_value(0);
          accumulate(slot(0), Block::Constant(v.rows(), v.cols(), g(0, 0)), v);
        }
        break;
      case Op::kMatMul: {
        const Block& a = in_value(0);
        const Block& b = in_value(1);
        if (want(n.inputs[0])) {
          Block c = (g.matrix() * b.matrix().transpose()).array();
          accumulate(slot(0), c, a);
        }
        if (want(n.inputs[1])) {
          Block c = (a.matrix().transpose() * g.matrix()).array();
          accumulate(slot(1), c, b);
        }
        break;
      }
      case Op::kBroadcastCols:
        if (want(n.inputs[0])) accumulate(slot(0), g.rowwise().sum(), in_value(0));
        break;
      case Op::kConcatRows: {
        Eigen::Index r0 = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          const Eigen::Index rows = in_value(k).rows();
          if (want(n.inputs[k])) accumulate(slot(k), g.middleRows(r0, rows), in_value(k));
          r0 += rows;
        }
        break;
      }
      case Op::kSliceRows:
        if (want(n.inputs[0])) {
          const Block& v = in_value(0);
          Block full = Block::Zero(v.rows(), v.cols());
          full.middleRows(n.iattr, g.rows()) = g;
          accumulate(slot(0), full, v);
        }
        break;
    }
    if (n.op != Op::kParameter) Block().swap(g);  // release early
  }

  GradientMap out;
  for (std::size_t i = 0; i <= root.index(); ++i) {
    if (nodes_[i].op != Op::kParameter || !reached[i]) continue;
    Block g = adj[i].size() == 0 ? Block::Zero(nodes_[i].value.rows(), nodes_[i].value.cols())
                                 : std::move(adj[i]);
    if (!g.allFinite()) {
      throw NumericalError("non-finite gradient at parameter node " + std::to_string(i),
                           static_cast<std::int64_t>(i));
    }
    out.entries.emplace_back(NodeId(static_cast<std::uint32_t>(i)), std::move(g));
  }
  return out;
}

}  // namespace madrom::diff
