#include "madrom/training/baselines.hpp"

#include <stdexcept>

#include "detail.hpp"
#include "madrom/training/adam.hpp"
#include "madrom/training/schedule.hpp"

namespace madrom::train {

using net::NetworkWeights;

namespace {

net::NetworkConfig latent_free(net::NetworkConfig c) {
  c.latent_dim = 0;
  c.insert_latent_at.reset();
  return c;
}

}  // namespace

WeightsResult from_scratch(const net::NetworkConfig& net_config, const TrainConfig& config,
                           const problems::ProblemInstance& instance) {
  const net::NetworkConfig c = latent_free(net_config);
  c.validate();
  return train_weights(net::init_weights(c, config.seed), config, instance, "scratch");
}

WeightsResult transfer_learning(const net::NetworkConfig& net_config, const TrainConfig& source_config,
                                const TrainConfig& target_config,
                                const problems::ProblemInstance& source,
                                const problems::ProblemInstance& target) {
  const net::NetworkConfig c = latent_free(net_config);
  c.validate();
  WeightsResult src = train_weights(net::init_weights(c, source_config.seed), source_config, source, "source");
  WeightsResult tgt = train_weights(src.weights, target_config, target, "target");
  WeightsResult out;
  out.weights = std::move(tgt.weights);
  out.trace = std::move(src.trace);
  for (auto& row : tgt.trace.rows) out.trace.rows.push_back(std::move(row));
  return out;
}

WeightsResult reptile_pretrain(const net::NetworkConfig& net_config, const TrainConfig& config,
                               const std::vector<problems::InstancePtr>& instances) {
  const net::NetworkConfig c = latent_free(net_config);
  c.validate();
  config.validate();
  if (instances.empty()) throw std::invalid_argument("reptile_pretrain: need at least one instance");
  NetworkWeights meta = net::init_weights(c, config.seed);
  problems::Rng batches = detail::stream(config.seed, detail::kBatches);
  problems::Rng tasks = detail::stream(config.seed, detail::kTaskChoice);
  std::uniform_int_distribution<std::size_t> pick(0, instances.size() - 1);
  const Eigen::VectorXd z;
  const std::int64_t total = config.iterations;
  detail::Stopwatch clock(config.strict);
  WeightsResult out;

  for (std::int64_t round = 0; round < total; ++round) {
    const double lr = lr_at(round, total, config.lr, config.milestones, config.decay);
    const auto& instance = *instances[pick(tasks)];
    NetworkWeights task = meta;
    AdamState adam(static_cast<Eigen::Index>(task.size()));
    double last = 0.0;
    for (int s = 0; s < config.reptile_inner_steps; ++s) {
      InstanceLoss r;
      try {
        r = instance_loss(task, z, instance, config, 0.0, net::Trainable::kWeights, batches);
        adam_step(adam, task.flat(), r.weight_grad, lr);
      } catch (const NumericalError& e) {
        throw DivergenceError("reptile diverged in round " + std::to_string(round) + ": " + e.what(), round,
                              meta, {}, last);
      }
      last = r.loss;
    }
    auto m = meta.flat();
    const auto tw = task.flat();
    // Convex-combination form is exact at both ends (step 0 and step 1).
    const double eps = config.reptile_step;
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = (1.0 - eps) * m[k] + eps * tw[k];
    out.trace.rows.push_back(TraceRow{round, last, std::nullopt, lr, clock.ms(), "reptile"});
  }
  out.weights = std::move(meta);
  return out;
}

}  // namespace madrom::train
