#pragma once

#include "madrom/training/trainer.hpp"

namespace madrom::train {

/// Physics-informed training of a latent-free network from a seeded init.
WeightsResult from_scratch(const net::NetworkConfig& net_config, const TrainConfig& config,
                           const problems::ProblemInstance& instance);

/// From-scratch on `source` (phase "source"), then all weights fine-tuned on
/// `target` (phase "target").
WeightsResult transfer_learning(const net::NetworkConfig& net_config, const TrainConfig& source_config,
                                const TrainConfig& target_config,
                                const problems::ProblemInstance& source,
                                const problems::ProblemInstance& target);

/// First-order meta-learning: for `config.iterations` rounds, pick a task
/// uniformly, run `reptile_inner_steps` Adam steps from the meta-weights with a
/// fresh optimizer, and move the meta-weights by reptile_step toward the result.
WeightsResult reptile_pretrain(const net::NetworkConfig& net_config, const TrainConfig& config,
                               const std::vector<problems::InstancePtr>& instances);

}  // namespace madrom::train
