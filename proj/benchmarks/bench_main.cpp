#include <random>

#include <benchmark/benchmark.h>
#include <Eigen/Core>

#include "madrom/network/network.hpp"
#include "madrom/problems/burgers.hpp"
#include "madrom/problems/burgers_reference.hpp"
#include "madrom/problems/grf.hpp"
#include "madrom/problems/instance_spec.hpp"
#include "madrom/problems/laplace.hpp"
#include "madrom/training/trainer.hpp"

using namespace madrom;

namespace {

net::NetworkConfig net_2d(int width, int latent) {
  net::NetworkConfig c;
  c.depth = 4;
  c.width = width;
  c.spatial_dim = 2;
  c.latent_dim = latent;
  return c;
}

problems::InstancePtr burgers_task() {
  problems::Rng rng(1);
  return problems::make_instance(
      problems::InstanceSpec{problems::burgers_spec_sample(rng, problems::burgers_grf(), 0.01, false)});
}

problems::InstancePtr laplace_task() {
  problems::Rng rng(1);
  return problems::make_instance(problems::InstanceSpec{problems::laplace_polygon_spec(rng)});
}

// Plain forward pass over a batch of points.
void BM_Forward(benchmark::State& state) {
  const auto c = net_2d(static_cast<int>(state.range(0)), 16);
  const auto w = net::init_weights(c, 0);
  const Eigen::ArrayXXd pts = (Eigen::ArrayXXd::Random(2, state.range(1)) + 1.0) / 2.0;
  const Eigen::VectorXd z = Eigen::VectorXd::Constant(16, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(net::forward(w, pts, z));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_Forward)->Args({64, 1024})->Args({128, 1024})->Args({64, 8192});

// Jets, loss and gradients for one task batch: the inner loop of training.
void instance_loss_bench(benchmark::State& state, const problems::ProblemInstance& inst, bool periodic) {
  auto c = net_2d(static_cast<int>(state.range(0)), 16);
  if (periodic) c.periodic_embedding = net::PeriodicEmbedding{0, 1.0};
  const auto w = net::init_weights(c, 0);
  const Eigen::VectorXd z = Eigen::VectorXd::Constant(16, 0.1);
  train::TrainConfig cfg;
  cfg.interior_samples = static_cast<int>(state.range(1));
  cfg.boundary_samples = static_cast<int>(state.range(1) / 8);
  problems::Rng rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(train::instance_loss(w, z, inst, cfg, 1e-4, net::Trainable::kBoth, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_BurgersLossAndGradient(benchmark::State& state) {
  static const auto inst = burgers_task();
  instance_loss_bench(state, *inst, true);
}
BENCHMARK(BM_BurgersLossAndGradient)->Args({64, 1024})->Args({128, 1024})->Unit(benchmark::kMillisecond);

void BM_LaplaceLossAndGradient(benchmark::State& state) {
  static const auto inst = laplace_task();
  instance_loss_bench(state, *inst, false);
}
BENCHMARK(BM_LaplaceLossAndGradient)->Args({64, 512})->Args({64, 2048})->Unit(benchmark::kMillisecond);

// Pseudo-spectral reference solve on the full mesh.
void BM_BurgersReference(benchmark::State& state) {
  problems::Rng rng(3);
  const auto u0 = problems::grf_sample(problems::burgers_grf(), rng);
  problems::BurgersReferenceOptions opt;
  opt.nx = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(problems::burgers_reference([&](double x) { return u0(x); }, 0.01, opt));
  }
}
BENCHMARK(BM_BurgersReference)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
