#include "madrom/network/network.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "madrom/diff/kernels.hpp"
#include "madrom/hash.hpp"

namespace madrom::net {

using diff::Block;
using diff::Graph;
using diff::Jet2;
using diff::NodeId;

void NetworkConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("network config: " + msg); };
  if (depth < 2) fail("depth must be >= 2");
  if (width < 1) fail("width must be >= 1");
  if (spatial_dim < 1) fail("spatial_dim must be >= 1");
  if (output_dim < 1) fail("output_dim must be >= 1");
  if (latent_dim < 0) fail("latent_dim must be >= 0");
  if (!(first_layer_scale > 0.0) || !std::isfinite(first_layer_scale)) {
    fail("first_layer_scale must be positive and finite");
  }
  if (insert_latent_at) {
    if (*insert_latent_at < 1 || *insert_latent_at > depth - 2) {
      fail("insert_latent_at must lie in [1, depth-2]");
    }
    if (width <= latent_dim) fail("insert_latent_at requires width > latent_dim");
  }
  if (periodic_embedding) {
    if (periodic_embedding->coordinate < 0 || periodic_embedding->coordinate >= spatial_dim) {
      fail("periodic_embedding coordinate out of range");
    }
    if (!(periodic_embedding->period > 0.0) || !std::isfinite(periodic_embedding->period)) {
      fail("periodic_embedding period must be positive");
    }
  }
}

int NetworkConfig::embedded_dim() const { return spatial_dim + (periodic_embedding ? 1 : 0); }

std::uint64_t NetworkConfig::fingerprint() const {
  Fnv1a h;
  h.update("madrom.network.v1");
  h.update_value(std::int32_t{depth});
  h.update_value(std::int32_t{width});
  h.update_value(std::int32_t{spatial_dim});
  h.update_value(std::int32_t{output_dim});
  h.update_value(std::int32_t{latent_dim});
  h.update_value(first_layer_scale);
  h.update_value(std::int32_t{insert_latent_at.value_or(-1)});
  h.update_value(std::int32_t{periodic_embedding ? periodic_embedding->coordinate : -1});
  h.update_value(periodic_embedding ? periodic_embedding->period : 0.0);
  return h.digest();
}

std::vector<LayerShape> layer_shapes(const NetworkConfig& config) {
  config.validate();
  std::vector<LayerShape> shapes;
  const int insert = config.insert_latent_at.value_or(-1);
  std::size_t offset = 0;
  Eigen::Index prev = config.embedded_dim();
  for (int l = 0; l < config.depth; ++l) {
    LayerShape s;
    if (l == config.depth - 1) {
      s.out = config.output_dim;
    } else if (l == insert - 1) {
      s.out = config.width - config.latent_dim;
    } else {
      s.out = config.width;
    }
    s.in_x = prev;
    s.in_z = (l == 0 || l == insert) ? config.latent_dim : 0;
    s.offset = offset;
    offset += s.size();
    prev = s.out;
    shapes.push_back(s);
  }
  return shapes;
}

NetworkWeights::NetworkWeights(NetworkConfig config)
    : config_(std::move(config)), shapes_(layer_shapes(config_)) {
  std::size_t total = 0;
  for (const auto& s : shapes_) total += s.size();
  flat_.assign(total, 0.0);
}

Eigen::Map<const Eigen::MatrixXd> NetworkWeights::weight_x(int l) const {
  const auto& s = layer(l);
  return {flat_.data() + s.wx_offset(), s.out, s.in_x};
}
Eigen::Map<const Eigen::MatrixXd> NetworkWeights::weight_z(int l) const {
  const auto& s = layer(l);
  return {flat_.data() + s.wz_offset(), s.out, s.in_z};
}
Eigen::Map<const Eigen::VectorXd> NetworkWeights::bias(int l) const {
  const auto& s = layer(l);
  return {flat_.data() + s.bias_offset(), s.out};
}
Eigen::Map<Eigen::MatrixXd> NetworkWeights::weight_x(int l) {
  const auto& s = layer(l);
  return {flat_.data() + s.wx_offset(), s.out, s.in_x};
}
Eigen::Map<Eigen::MatrixXd> NetworkWeights::weight_z(int l) {
  const auto& s = layer(l);
  return {flat_.data() + s.wz_offset(), s.out, s.in_z};
}
Eigen::Map<Eigen::VectorXd> NetworkWeights::bias(int l) {
  const auto& s = layer(l);
  return {flat_.data() + s.bias_offset(), s.out};
}

std::uint64_t NetworkWeights::hash() const {
  Fnv1a h;
  h.update_value(config_.fingerprint());
  h.update(std::span<const double>(flat_));
  return h.digest();
}

NetworkWeights init_weights(const NetworkConfig& config, std::uint64_t seed) {
  NetworkWeights w(config);
  std::mt19937_64 rng(seed);
  auto flat = w.flat();
  for (int l = 0; l < w.layers(); ++l) {
    const auto& s = w.layer(l);
    const double scale = l == 0 ? config.first_layer_scale : 1.0;
    const double bound = std::sqrt(6.0 / static_cast<double>(s.fan_in())) / scale;
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = s.offset; i < s.offset + s.size(); ++i) flat[i] = dist(rng);
  }
  return w;
}

Eigen::ArrayXXd embed_input(const Eigen::ArrayXXd& points, const NetworkConfig& config) {
  if (points.rows() != config.spatial_dim) {
    throw std::invalid_argument("embed_input: points must have spatial_dim rows");
  }
  if (!config.periodic_embedding) return points;
  const int c = config.periodic_embedding->coordinate;
  const double factor = 2.0 * std::numbers::pi / config.periodic_embedding->period;
  Eigen::ArrayXXd out(config.embedded_dim(), points.cols());
  Eigen::Index r = 0;
  for (int k = 0; k < config.spatial_dim; ++k) {
    if (k == c) {
      Eigen::ArrayXXd phase = points.row(k) * factor;
      out.row(r++) = phase.unaryExpr([](double v) { return diff::kernel_sin(v); });
      out.row(r++) = phase.unaryExpr([](double v) { return diff::kernel_cos(v); });
    } else {
      out.row(r++) = points.row(k);
    }
  }
  return out;
}

Jet2 embed_input(Graph& g, std::span<const Jet2> coords, const NetworkConfig& config) {
  if (static_cast<int>(coords.size()) != config.spatial_dim) {
    throw std::invalid_argument("embed_input: expected one jet per spatial coordinate");
  }
  std::vector<Jet2> rows;
  for (int k = 0; k < config.spatial_dim; ++k) {
    if (config.periodic_embedding && config.periodic_embedding->coordinate == k) {
      const double factor = 2.0 * std::numbers::pi / config.periodic_embedding->period;
      Jet2 phase = diff::jet_scale(g, coords[static_cast<std::size_t>(k)], factor);
      rows.push_back(diff::jet_sin(g, phase));
      rows.push_back(diff::jet_cos(g, phase));
    } else {
      rows.push_back(coords[static_cast<std::size_t>(k)]);
    }
  }
  if (rows.size() == 1) return rows.front();
  return diff::jet_concat_rows(g, rows);
}

namespace {

constexpr Eigen::Index kForwardChunk = 4096;

void forward_chunk(const NetworkWeights& w, const Eigen::ArrayXXd& embedded,
                   const Eigen::VectorXd& z, Eigen::Ref<Eigen::ArrayXXd> out) {
  const auto& config = w.config();
  Eigen::ArrayXXd h = embedded;
  for (int l = 0; l < w.layers(); ++l) {
    const auto& s = w.layer(l);
    Eigen::ArrayXXd pre(s.out, h.cols());
    Eigen::Map<Eigen::MatrixXd> pre_view(pre.data(), pre.rows(), pre.cols());
    diff::fixed_order_matmul(w.weight_x(l), h.matrix(), pre_view);
    Eigen::ArrayXXd column;
    if (s.in_z > 0) {
      Eigen::MatrixXd zterm(s.out, 1);
      diff::fixed_order_matmul(w.weight_z(l), z, zterm);
      column = zterm.array() + w.bias(l).array();
    } else {
      column = w.bias(l).array();
    }
    pre = pre + column.replicate(1, pre.cols());
    if (l == w.layers() - 1) {
      out = pre;
      return;
    }
    if (l == 0 && config.first_layer_scale != 1.0) pre = pre * config.first_layer_scale;
    h = pre.unaryExpr([](double v) { return diff::kernel_sin(v); });
  }
}

}  // namespace

Eigen::ArrayXXd forward(const NetworkWeights& w, const Eigen::ArrayXXd& points,
                        const Eigen::VectorXd& z) {
  const auto& config = w.config();
  if (z.size() != config.latent_dim) throw std::invalid_argument("forward: latent size mismatch");
  if (points.rows() != config.spatial_dim) {
    throw std::invalid_argument("forward: points must have spatial_dim rows");
  }
  Eigen::ArrayXXd embedded = embed_input(points, config);
  Eigen::ArrayXXd out(config.output_dim, points.cols());
  for (Eigen::Index start = 0; start < points.cols(); start += kForwardChunk) {
    const Eigen::Index n = std::min(kForwardChunk, points.cols() - start);
    Eigen::ArrayXXd chunk = embedded.middleCols(start, n);
    forward_chunk(w, chunk, z, out.middleCols(start, n));
  }
  return out;
}

BoundNetwork bind(Graph& g, const NetworkWeights& w, const Eigen::VectorXd& z,
                  Trainable trainable) {
  const auto& config = w.config();
  if (z.size() != config.latent_dim) throw std::invalid_argument("bind: latent size mismatch");
  const bool weights = trainable == Trainable::kWeights || trainable == Trainable::kBoth;
  const bool latent = trainable == Trainable::kLatent || trainable == Trainable::kBoth;
  BoundNetwork net;
  net.config = config;
  auto leaf = [&](Block value, std::int64_t tag, bool train) {
    return train ? g.parameter(std::move(value), tag) : g.constant(std::move(value));
  };
  for (int l = 0; l < w.layers(); ++l) {
    const auto& s = w.layer(l);
    net.wx.push_back(leaf(w.weight_x(l).array(), 3 * l, weights));
    net.wz.push_back(s.in_z > 0 ? leaf(w.weight_z(l).array(), 3 * l + 1, weights) : NodeId());
    net.bias.push_back(leaf(w.bias(l).array(), 3 * l + 2, weights));
  }
  if (config.latent_dim > 0) net.z = leaf(z.array(), kLatentTag, latent);
  return net;
}

std::vector<Jet2> lift_points(Graph& g, const Eigen::ArrayXXd& points, std::span<const int> order) {
  const int d = static_cast<int>(points.rows());
  if (static_cast<int>(order.size()) != d) {
    throw std::invalid_argument("lift_points: need one order per coordinate");
  }
  std::vector<Jet2> coords;
  for (int k = 0; k < d; ++k) {
    coords.push_back(diff::lift_coordinate(g, Block(points.row(k)), k, d, order[static_cast<std::size_t>(k)]));
  }
  return coords;
}

std::vector<Jet2> forward_with_jets(Graph& g, const BoundNetwork& net,
                                    std::span<const Jet2> coords) {
  const auto& config = net.config;
  Jet2 h = embed_input(g, coords, config);
  const Eigen::Index batch = g.value(h.val).cols();
  const int layers = static_cast<int>(net.wx.size());
  for (int l = 0; l < layers; ++l) {
    Jet2 pre = diff::jet_matmul(g, net.wx[static_cast<std::size_t>(l)], h);
    NodeId column = net.bias[static_cast<std::size_t>(l)];
    if (net.wz[static_cast<std::size_t>(l)].valid()) {
      column = g.add(g.matmul(net.wz[static_cast<std::size_t>(l)], net.z), column);
    }
    pre = diff::jet_add_node(g, pre, g.broadcast_cols(column, batch));
    if (l == layers - 1) {
      h = pre;
      break;
    }
    if (l == 0 && config.first_layer_scale != 1.0) {
      pre = diff::jet_scale(g, pre, config.first_layer_scale);
    }
    h = diff::jet_sin(g, pre);
  }
  std::vector<Jet2> outputs;
  if (config.output_dim == 1) {
    outputs.push_back(h);
  } else {
    for (int i = 0; i < config.output_dim; ++i) outputs.push_back(diff::jet_slice_rows(g, h, i, 1));
  }
  return outputs;
}

std::vector<double> weight_gradient(const diff::GradientMap& grads, const BoundNetwork& net,
                                    const NetworkWeights& w) {
  std::vector<double> out(w.size(), 0.0);
  auto copy = [&](NodeId id, std::size_t offset) {
    if (!id.valid()) return;
    const Block* gb = grads.find(id);
    if (gb == nullptr) return;
    std::copy(gb->data(), gb->data() + gb->size(), out.begin() + static_cast<std::ptrdiff_t>(offset));
  };
  for (int l = 0; l < w.layers(); ++l) {
    const auto& s = w.layer(l);
    copy(net.wx[static_cast<std::size_t>(l)], s.wx_offset());
    copy(net.wz[static_cast<std::size_t>(l)], s.wz_offset());
    copy(net.bias[static_cast<std::size_t>(l)], s.bias_offset());
  }
  return out;
}

Eigen::VectorXd latent_gradient(const diff::GradientMap& grads, const BoundNetwork& net) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(net.config.latent_dim);
  if (!net.z.valid()) return out;
  if (const Block* gb = grads.find(net.z)) out = gb->matrix().col(0);
  return out;
}

}  // namespace madrom::net
