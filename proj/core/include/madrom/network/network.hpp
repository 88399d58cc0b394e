#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "madrom/diff/graph.hpp"
#include "madrom/diff/jet.hpp"

namespace madrom::net {

/// Replaces coordinate `coordinate` by (sin(2 pi x / P), cos(2 pi x / P)),
/// which makes the network exactly P-periodic in that coordinate.
struct PeriodicEmbedding {
  int coordinate = 0;
  double period = 1.0;

  friend bool operator==(const PeriodicEmbedding&, const PeriodicEmbedding&) = default;
};

struct NetworkConfig {
  int depth = 7;         // number of affine layers
  int width = 128;       // hidden units
  int spatial_dim = 1;
  int output_dim = 1;
  int latent_dim = 0;
  /// Pre-activation multiplier of the first layer: sin(w0 (W x + b)).
  double first_layer_scale = 1.0;
  /// Hidden layer that receives z a second time (valid range [1, depth-2]).
  std::optional<int> insert_latent_at;
  std::optional<PeriodicEmbedding> periodic_embedding;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  int embedded_dim() const;
  std::uint64_t fingerprint() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Affine layer l computes W_x h + W_z z + b. W_x and W_z are stored
/// contiguously (column-major) and then the bias, layer after layer.
struct LayerShape {
  Eigen::Index out = 0;
  Eigen::Index in_x = 0;
  Eigen::Index in_z = 0;
  std::size_t offset = 0;

  std::size_t wx_offset() const { return offset; }
  std::size_t wz_offset() const { return offset + static_cast<std::size_t>(out * in_x); }
  std::size_t bias_offset() const { return wz_offset() + static_cast<std::size_t>(out * in_z); }
  std::size_t size() const { return static_cast<std::size_t>(out * (in_x + in_z + 1)); }
  Eigen::Index fan_in() const { return in_x + in_z; }
};

std::vector<LayerShape> layer_shapes(const NetworkConfig& config);

class NetworkWeights {
 public:
  explicit NetworkWeights(NetworkConfig config);  // all zeros

  const NetworkConfig& config() const { return config_; }
  int layers() const { return static_cast<int>(shapes_.size()); }
  const LayerShape& layer(int l) const { return shapes_.at(static_cast<std::size_t>(l)); }
  std::size_t size() const { return flat_.size(); }

  std::span<double> flat() { return flat_; }
  std::span<const double> flat() const { return flat_; }

  Eigen::Map<const Eigen::MatrixXd> weight_x(int l) const;
  Eigen::Map<const Eigen::MatrixXd> weight_z(int l) const;
  Eigen::Map<const Eigen::VectorXd> bias(int l) const;
  Eigen::Map<Eigen::MatrixXd> weight_x(int l);
  Eigen::Map<Eigen::MatrixXd> weight_z(int l);
  Eigen::Map<Eigen::VectorXd> bias(int l);

  /// FNV-1a over the config fingerprint and the raw weight bytes.
  std::uint64_t hash() const;

  friend bool operator==(const NetworkWeights& a, const NetworkWeights& b) {
    return a.config_ == b.config_ && a.flat_ == b.flat_;
  }

 private:
  NetworkConfig config_;
  std::vector<LayerShape> shapes_;
  std::vector<double> flat_;
};

/// Per-task latent code. owner = task index, or -1 for a new task.
struct LatentVector {
  Eigen::VectorXd components;
  std::int64_t owner = -1;
};

/// Uniform init in +-sqrt(6 / fan_in) / s, s = first_layer_scale on the first
/// layer and 1 elsewhere. Biases use the same bound as their layer.
NetworkWeights init_weights(const NetworkConfig& config, std::uint64_t seed);

/// Points (spatial_dim x B) to embedded features (embedded_dim x B).
Eigen::ArrayXXd embed_input(const Eigen::ArrayXXd& points, const NetworkConfig& config);
diff::Jet2 embed_input(diff::Graph& g, std::span<const diff::Jet2> coords,
                       const NetworkConfig& config);

/// Plain evaluation, output_dim x B. Columns are processed independently, so
/// the result does not depend on batch size or chunking.
Eigen::ArrayXXd forward(const NetworkWeights& w, const Eigen::ArrayXXd& points,
                        const Eigen::VectorXd& z);

enum class Trainable : std::uint8_t { kNone, kWeights, kLatent, kBoth };

/// Network blocks loaded into a graph, either as parameter leaves or as
/// constants depending on what is being trained.
struct BoundNetwork {
  NetworkConfig config;
  std::vector<diff::NodeId> wx, wz, bias;
  diff::NodeId z;  // latent_dim x 1, invalid when latent_dim == 0
};

/// Graph tag of the latent leaf; weight leaves use 3 * layer + {0, 1, 2}.
inline constexpr std::int64_t kLatentTag = -2;

BoundNetwork bind(diff::Graph& g, const NetworkWeights& w, const Eigen::VectorXd& z,
                  Trainable trainable);

/// Coordinate jets for a batch of points (spatial_dim x B). order[k] caps the
/// derivative order tracked for coordinate k.
std::vector<diff::Jet2> lift_points(diff::Graph& g, const Eigen::ArrayXXd& points,
                                    std::span<const int> order);

/// Output jets, one per output component (each 1 x B). The latent enters with
/// zero coordinate derivatives.
std::vector<diff::Jet2> forward_with_jets(diff::Graph& g, const BoundNetwork& net,
                                          std::span<const diff::Jet2> coords);

/// Weight gradient in the flat layout of `w` (zeros for blocks that were not
/// trainable in the graph).
std::vector<double> weight_gradient(const diff::GradientMap& grads, const BoundNetwork& net,
                                    const NetworkWeights& w);
Eigen::VectorXd latent_gradient(const diff::GradientMap& grads, const BoundNetwork& net);

}  // namespace madrom::net
