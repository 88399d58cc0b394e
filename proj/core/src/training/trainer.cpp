#include "madrom/training/trainer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "detail.hpp"
#include "madrom/eval/metrics.hpp"
#include "madrom/training/adam.hpp"
#include "madrom/training/loss.hpp"
#include "madrom/training/schedule.hpp"

namespace madrom::train {

using diff::Graph;
using net::NetworkWeights;
using net::Trainable;

DivergenceError::DivergenceError(const std::string& what, std::int64_t iteration,
                                 NetworkWeights best_weights, std::vector<Eigen::VectorXd> best_latents,
                                 double best_loss)
    : NumericalError(what),
      iteration_(iteration),
      best_weights_(std::move(best_weights)),
      best_latents_(std::move(best_latents)),
      best_loss_(best_loss) {}

InstanceLoss instance_loss(const NetworkWeights& w, const Eigen::VectorXd& z,
                           const problems::ProblemInstance& instance, const TrainConfig& config,
                           double penalty, Trainable trainable, problems::Rng& rng) {
  const Eigen::ArrayXXd interior = instance.sample_interior(rng, config.interior_samples);
  const Eigen::ArrayXXd boundary = instance.sample_boundary(rng, config.boundary_samples);
  Graph g;
  const net::BoundNetwork bound = net::bind(g, w, z, trainable);
  const problems::Field field = [&bound](Graph& gg, std::span<const diff::Jet2> coords) {
    return net::forward_with_jets(gg, bound, coords);
  };
  const LossNodes nodes = mc_physics_loss(g, instance, field, interior, boundary,
                                          config.boundary_weight, config.loss_exponent);
  const diff::NodeId total = regularized_loss(g, nodes.total, bound.z, penalty);
  InstanceLoss out;
  out.loss = g.scalar(total);
  out.physics = g.scalar(nodes.total);
  if (trainable == Trainable::kNone) return out;
  if (!std::isfinite(out.loss)) throw NumericalError("non-finite loss", total.index());
  const diff::GradientMap grads = g.backward(total);
  if (trainable == Trainable::kWeights || trainable == Trainable::kBoth) {
    out.weight_grad = net::weight_gradient(grads, bound, w);
  }
  if ((trainable == Trainable::kLatent || trainable == Trainable::kBoth) && bound.z.valid()) {
    out.latent_grad = net::latent_gradient(grads, bound);
  }
  return out;
}

double evaluate(const NetworkWeights& w, const Eigen::VectorXd& z, const problems::ProblemInstance& instance) {
  const problems::EvalSet& set = instance.evaluation_set();
  const Eigen::ArrayXXd pred = net::forward(w, set.points, z);
  const Eigen::ArrayXd row = pred.row(0).transpose();
  return eval::relative_l2(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                           std::span<const double>(set.values.data(), static_cast<std::size_t>(set.values.size())));
}

namespace {

std::span<double> as_span(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

/// Lowest-loss iterate seen so far.
struct Best {
  double loss = std::numeric_limits<double>::infinity();
  NetworkWeights weights;
  std::vector<Eigen::VectorXd> latents;

  Best(const NetworkWeights& w, std::vector<Eigen::VectorXd> z) : weights(w), latents(std::move(z)) {}

  void offer(double l, const NetworkWeights& w, const std::vector<Eigen::VectorXd>& z) {
    if (l < loss) {
      loss = l;
      weights = w;
      latents = z;
    }
  }
  [[noreturn]] void fail(std::int64_t t, const std::string& why) const {
    throw DivergenceError("training diverged at iteration " + std::to_string(t) + ": " + why, t, weights,
                          latents, loss);
  }
};

}  // namespace

PretrainResult pretrain(const net::NetworkConfig& net_config, const TrainConfig& config,
                        const std::vector<problems::InstancePtr>& instances) {
  net_config.validate();
  config.validate();
  if (instances.empty()) throw std::invalid_argument("pretrain: need at least one instance");
  const problems::Family family = instances[0]->family();
  for (const auto& inst : instances) {
    if (inst->family() != family) throw std::invalid_argument("pretrain: instances mix problem families");
    if (inst->spatial_dim() != net_config.spatial_dim) {
      throw std::invalid_argument("pretrain: network spatial_dim does not match the problem");
    }
  }
  const std::size_t n_tasks = instances.size();
  const int n = net_config.latent_dim;

  NetworkWeights w = net::init_weights(net_config, config.seed);
  std::vector<Eigen::VectorXd> z(n_tasks, Eigen::VectorXd::Zero(n));
  {
    problems::Rng init_rng = detail::stream(config.seed, detail::kLatentInit);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& zi : z) {
      for (int k = 0; k < n; ++k) zi[k] = config.latent_init_std * normal(init_rng);
    }
  }
  problems::Rng rng = detail::stream(config.seed, detail::kBatches);

  AdamState adam_w(static_cast<Eigen::Index>(w.size()));
  std::vector<AdamState> adam_z(n_tasks, AdamState(n));
  const std::int64_t total = config.iterations;
  RunTrace trace;
  Best best(w, z);
  detail::Stopwatch clock(config.strict);
  std::vector<double> grad_w(w.size());
  std::vector<Eigen::VectorXd> grad_z(n_tasks);

  for (std::int64_t t = 0; t <= total; ++t) {
    const bool step = t < total;
    const double lr = lr_at(t, total, config.lr, config.milestones, config.decay);
    const double lr_z = lr_at(t, total, config.effective_latent_lr(), config.milestones, config.decay);
    double loss = 0.0;
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    try {
      for (std::size_t i = 0; i < n_tasks; ++i) {
        InstanceLoss r = instance_loss(w, z[i], *instances[i], config, config.latent_penalty,
                                       step ? Trainable::kBoth : Trainable::kNone, rng);
        loss += r.loss;
        for (std::size_t k = 0; k < grad_w.size() && step; ++k) grad_w[k] += r.weight_grad[k];
        grad_z[i] = step && n > 0 ? r.latent_grad : Eigen::VectorXd::Zero(n);
      }
    } catch (const DivergenceError&) {
      throw;
    } catch (const NumericalError& e) {
      best.fail(t, e.what());
    }
    if (!std::isfinite(loss)) best.fail(t, "non-finite loss");
    best.offer(loss, w, z);

    TraceRow row;
    row.iteration = t;
    row.loss = loss;
    row.lr = lr;
    row.phase = "pretrain";
    if (detail::records_error(config, t, total)) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n_tasks; ++i) sum += evaluate(w, z[i], *instances[i]);
      row.relative_l2 = sum / static_cast<double>(n_tasks);
    }
    row.elapsed_ms = clock.ms();
    trace.rows.push_back(std::move(row));

    if (!step) break;
    try {
      adam_step(adam_w, w.flat(), grad_w, lr);
      for (std::size_t i = 0; i < n_tasks; ++i) adam_step(adam_z[i], as_span(z[i]), as_span(grad_z[i]), lr_z);
    } catch (const NumericalError& e) {
      best.fail(t, e.what());
    }
  }

  PretrainResult out{PretrainedModel{w, {}, family, {}, {}}, std::move(trace)};
  for (std::size_t i = 0; i < n_tasks; ++i) {
    out.model.bank.latents.push_back(net::LatentVector{z[i], static_cast<std::int64_t>(i)});
    out.model.tasks.push_back(instances[i]->spec());
  }
  bool all_descriptors = true;
  for (const auto& inst : instances) all_descriptors = all_descriptors && inst->descriptor().has_value();
  if (all_descriptors) {
    for (const auto& inst : instances) out.model.bank.descriptors.push_back(*inst->descriptor());
  }
  out.model.manifest = Manifest{config, total, config.seed, kCodeVersion};
  return out;
}

net::LatentVector latent_init(const PretrainedModel& model, const problems::ProblemInstance& instance) {
  const LatentBank& bank = model.bank;
  if (bank.latents.empty()) throw std::invalid_argument("latent_init: empty latent bank");
  const auto descriptor = instance.descriptor();
  if (bank.has_descriptors() && descriptor && bank.descriptors[0].size() == descriptor->size()) {
    std::size_t arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bank.descriptors.size(); ++i) {
      const double d = (bank.descriptors[i] - *descriptor).norm();
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    return net::LatentVector{bank.latents[arg].components, -1};
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(bank.latents[0].components.size());
  for (const auto& l : bank.latents) mean += l.components;
  mean /= static_cast<double>(bank.latents.size());
  return net::LatentVector{mean, -1};
}

FinetuneResult finetune(const TrainConfig& config, const PretrainedModel& model,
                        const problems::ProblemInstance& instance, FinetuneMode mode) {
  config.validate();
  if (instance.family() != model.family) throw std::invalid_argument("finetune: problem family mismatch");
  const int n = model.weights.config().latent_dim;
  if (mode == FinetuneMode::kLatent && n == 0) {
    throw std::invalid_argument("finetune: latent-only fine-tuning needs latent_dim > 0");
  }
  NetworkWeights w = model.weights;
  Eigen::VectorXd z = latent_init(model, instance).components;
  const bool train_w = mode == FinetuneMode::kLatentAndWeights;
  const Trainable trainable = train_w ? Trainable::kBoth : Trainable::kLatent;
  const double penalty = config.penalty_in_finetune ? config.latent_penalty : 0.0;

  problems::Rng rng = detail::stream(config.seed, detail::kBatches);
  AdamState adam_w(train_w ? static_cast<Eigen::Index>(w.size()) : 0);
  AdamState adam_z(n);
  const std::int64_t total = config.iterations;
  FinetuneResult out;
  Best best(w, {z});
  detail::Stopwatch clock(config.strict);
  const char* phase = mode_name(mode);

  for (std::int64_t t = 0; t <= total; ++t) {
    const bool step = t < total;
    const double lr = lr_at(t, total, config.lr, config.milestones, config.decay);
    const double lr_z = lr_at(t, total, config.effective_latent_lr(), config.milestones, config.decay);
    InstanceLoss r;
    try {
      r = instance_loss(w, z, instance, config, penalty, step ? trainable : Trainable::kNone, rng);
    } catch (const NumericalError& e) {
      best.fail(t, e.what());
    }
    if (!std::isfinite(r.loss)) best.fail(t, "non-finite loss");
    best.offer(r.loss, w, {z});

    TraceRow row;
    row.iteration = t;
    row.loss = r.loss;
    row.lr = train_w ? lr : lr_z;
    row.phase = phase;
    if (detail::records_error(config, t, total)) row.relative_l2 = evaluate(w, z, instance);
    row.elapsed_ms = clock.ms();
    out.trace.rows.push_back(std::move(row));

    if (!step) break;
    try {
      if (train_w) adam_step(adam_w, w.flat(), r.weight_grad, lr);
      if (n > 0) adam_step(adam_z, as_span(z), as_span(r.latent_grad), lr_z);
    } catch (const NumericalError& e) {
      best.fail(t, e.what());
    }
  }
  out.weights = std::move(w);
  out.latent = net::LatentVector{z, -1};
  return out;
}

WeightsResult train_weights(const NetworkWeights& init, const TrainConfig& config,
                            const problems::ProblemInstance& instance, const std::string& phase) {
  config.validate();
  if (init.config().latent_dim != 0) throw std::invalid_argument("train_weights: network must be latent-free");
  NetworkWeights w = init;
  const Eigen::VectorXd z;
  problems::Rng rng = detail::stream(config.seed, detail::kBatches);
  AdamState adam(static_cast<Eigen::Index>(w.size()));
  const std::int64_t total = config.iterations;
  WeightsResult out;
  Best best(w, {});
  detail::Stopwatch clock(config.strict);

  for (std::int64_t t = 0; t <= total; ++t) {
    const bool step = t < total;
    const double lr = lr_at(t, total, config.lr, config.milestones, config.decay);
    InstanceLoss r;
    try {
      r = instance_loss(w, z, instance, config, 0.0, step ? Trainable::kWeights : Trainable::kNone, rng);
    } catch (const NumericalError& e) {
      best.fail(t, e.what());
    }
    if (!std::isfinite(r.loss)) best.fail(t, "non-finite loss");
    best.offer(r.loss, w, {});

    TraceRow row;
    row.iteration = t;
    row.loss = r.loss;
    row.lr = lr;
    row.phase = phase;
    if (detail::records_error(config, t, total)) row.relative_l2 = evaluate(w, z, instance);
    row.elapsed_ms = clock.ms();
    out.trace.rows.push_back(std::move(row));

    if (!step) break;
    try {
      adam_step(adam, w.flat(), r.weight_grad, lr);
    } catch (const NumericalError& e) {
      best.fail(t, e.what());
    }
  }
  out.weights = std::move(w);
  return out;
}

}  // namespace madrom::train
