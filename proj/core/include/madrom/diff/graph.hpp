#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace madrom::diff {

/// Dense f64 value held by a graph node. Scalars are 1x1 blocks; batched
/// quantities are laid out features x samples (one column per sample).
using Block = Eigen::ArrayXXd;

/// Index of a node inside one Graph. Ids are only meaningful for the graph
/// that issued them.
class NodeId {
 public:
  static constexpr std::uint32_t kInvalid = 0xffffffffu;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint32_t index) : index_(index) {}

  constexpr std::uint32_t index() const { return index_; }
  constexpr bool valid() const { return index_ != kInvalid; }

  friend constexpr bool operator==(NodeId, NodeId) = default;
  friend constexpr auto operator<=>(NodeId, NodeId) = default;

 private:
  std::uint32_t index_ = kInvalid;
};

enum class Op : std::uint8_t {
  kConstant,
  kParameter,
  kAdd,
  kSub,
  kMul,
  kNeg,
  kSin,
  kCos,
  kExp,
  kPow,         // integer exponent >= 0
  kReciprocal,
  kAbsPow,      // |a|^p, real p >= 1
  kScale,       // a * c for a fixed constant c
  kSum,         // reduce every entry to a 1x1 block
  kMatMul,      // a (m x k) times b (k x n)
  kBroadcastCols,  // replicate an (m x 1) column n times
  kConcatRows,
  kSliceRows,
};

const char* op_name(Op op);

/// Gradient of a scalar root with respect to every parameter leaf reachable
/// from it, ordered by leaf id.
struct GradientMap {
  std::vector<std::pair<NodeId, Block>> entries;

  /// Gradient for `leaf`, or nullptr when the leaf is not reachable.
  const Block* find(NodeId leaf) const;
  std::size_t size() const { return entries.size(); }
};

/// Define-by-run reverse-mode graph. Node values are computed eagerly when a
/// node is created; backward() accumulates adjoints in reverse creation order.
///
/// Binary elementwise ops require equal shapes, except that either operand
/// may be a 1x1 block, which is broadcast.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;

  NodeId constant(double c);
  NodeId constant(Block value);
  /// Trainable leaf. `tag` is an opaque caller-side key (e.g. parameter slot).
  NodeId parameter(Block value, std::int64_t tag = -1);

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId neg(NodeId a);
  NodeId sin(NodeId a);
  NodeId cos(NodeId a);
  /// sin(a) and cos(a) from one sincos sweep. The pair share trigonometric
  /// work in backward as well.
  std::pair<NodeId, NodeId> sincos(NodeId a);
  NodeId exp(NodeId a);
  NodeId pow(NodeId a, int exponent);
  NodeId reciprocal(NodeId a);
  NodeId abs_pow(NodeId a, double p);
  NodeId scale(NodeId a, double factor);
  NodeId sum(NodeId a);
  NodeId matmul(NodeId a, NodeId b);
  NodeId broadcast_cols(NodeId column, Eigen::Index cols);
  NodeId concat_rows(std::span<const NodeId> parts);
  NodeId slice_rows(NodeId a, Eigen::Index start, Eigen::Index count);

  const Block& value(NodeId id) const;
  double scalar(NodeId id) const;
  Op op(NodeId id) const;
  std::span<const NodeId> inputs(NodeId id) const;
  std::int64_t tag(NodeId id) const;
  bool requires_grad(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }

  /// Parameter leaves in creation order.
  std::vector<NodeId> parameters() const;

  /// Reverse accumulation from a 1x1 root. Throws NumericalError naming the
  /// node whose adjoint became non-finite.
  GradientMap backward(NodeId root) const;

 private:
  struct Node {
    Op op;
    std::vector<NodeId> inputs;
    Block value;
    double attr = 0.0;        // exponent or scale factor
    Eigen::Index iattr = 0;   // slice start
    std::int64_t tag = -1;
    std::uint32_t partner = NodeId::kInvalid;  // sin <-> cos sibling
    bool requires_grad = false;
  };

  NodeId push(Op op, std::vector<NodeId> inputs, Block value, double attr = 0.0,
              Eigen::Index iattr = 0);
  const Node& node(NodeId id) const;
  NodeId binary(Op op, NodeId a, NodeId b);

  std::vector<Node> nodes_;
};

}  // namespace madrom::diff
