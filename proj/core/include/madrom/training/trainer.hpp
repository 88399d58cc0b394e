#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "madrom/errors.hpp"
#include "madrom/network/network.hpp"
#include "madrom/problems/instance_spec.hpp"
#include "madrom/problems/problem.hpp"
#include "madrom/training/config.hpp"
#include "madrom/training/trace.hpp"

namespace madrom::train {

/// Latent codes of the pre-training tasks and, for homogeneous families, the
/// descriptor of each task.
struct LatentBank {
  std::vector<net::LatentVector> latents;
  std::vector<Eigen::VectorXd> descriptors;  // empty or one per latent

  std::size_t size() const { return latents.size(); }
  int latent_dim() const { return latents.empty() ? 0 : static_cast<int>(latents[0].components.size()); }
  bool has_descriptors() const { return !descriptors.empty(); }
};

struct Manifest {
  TrainConfig config;
  std::int64_t iterations = 0;
  std::uint64_t init_seed = 0;
  std::string code_version;
};

struct PretrainedModel {
  net::NetworkWeights weights{net::NetworkConfig{}};
  LatentBank bank;
  problems::Family family = problems::Family::kOde;
  std::vector<problems::InstanceSpec> tasks;
  Manifest manifest;
};

/// Training stopped on a non-finite loss or gradient. Carries the iterate with
/// the lowest loss seen before the failure.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, std::int64_t iteration, net::NetworkWeights best_weights,
                  std::vector<Eigen::VectorXd> best_latents, double best_loss);

  std::int64_t iteration() const { return iteration_; }
  const net::NetworkWeights& best_weights() const { return best_weights_; }
  const std::vector<Eigen::VectorXd>& best_latents() const { return best_latents_; }
  double best_loss() const { return best_loss_; }

 private:
  std::int64_t iteration_;
  net::NetworkWeights best_weights_;
  std::vector<Eigen::VectorXd> best_latents_;
  double best_loss_;
};

/// Loss and gradients of one instance on one batch.
struct InstanceLoss {
  double loss = 0.0;           // regularized
  double physics = 0.0;
  std::vector<double> weight_grad;  // empty when weights are frozen
  Eigen::VectorXd latent_grad;      // empty when the latent is frozen
};

/// Samples a fresh batch from `rng` (interior first, then boundary) and
/// evaluates the regularized physics loss with its gradients.
InstanceLoss instance_loss(const net::NetworkWeights& w, const Eigen::VectorXd& z,
                           const problems::ProblemInstance& instance, const TrainConfig& config,
                           double penalty, net::Trainable trainable, problems::Rng& rng);

/// Relative L2 of the decoder against the instance's evaluation set.
double evaluate(const net::NetworkWeights& w, const Eigen::VectorXd& z,
                const problems::ProblemInstance& instance);

struct PretrainResult {
  PretrainedModel model;
  RunTrace trace;
};

/// Joint optimization of shared weights and one latent per task. The trace
/// loss is the sum of the per-task regularized losses; its relative_l2 is the
/// mean over tasks.
PretrainResult pretrain(const net::NetworkConfig& net_config, const TrainConfig& config,
                        const std::vector<problems::InstancePtr>& instances);

/// Latent of the task with the nearest descriptor (lowest index on ties), or
/// the mean latent when descriptors are unavailable.
net::LatentVector latent_init(const PretrainedModel& model, const problems::ProblemInstance& instance);

struct FinetuneResult {
  net::NetworkWeights weights{net::NetworkConfig{}};
  net::LatentVector latent;
  RunTrace trace;
};

/// MAD-L trains the latent only; MAD-LM trains latent and weights. Adam state
/// starts fresh.
FinetuneResult finetune(const TrainConfig& config, const PretrainedModel& model,
                        const problems::ProblemInstance& instance, FinetuneMode mode);

/// Trains all weights of a latent-free network from `init`, recording one trace
/// row per iteration under `phase`.
struct WeightsResult {
  net::NetworkWeights weights{net::NetworkConfig{}};
  RunTrace trace;
};
WeightsResult train_weights(const net::NetworkWeights& init, const TrainConfig& config,
                            const problems::ProblemInstance& instance, const std::string& phase);

inline constexpr const char* kCodeVersion = "madrom-0.1.0";

}  // namespace madrom::train
