#include "madrom/training/config.hpp"

#include <cmath>
#include <stdexcept>

namespace madrom::train {

const char* mode_name(FinetuneMode m) {
  return m == FinetuneMode::kLatent ? "mad-l" : "mad-lm";
}

FinetuneMode parse_mode(const std::string& s) {
  if (s == "mad-l") return FinetuneMode::kLatent;
  if (s == "mad-lm") return FinetuneMode::kLatentAndWeights;
  throw std::invalid_argument("unknown fine-tuning mode '" + s + "' (expected mad-l or mad-lm)");
}

void TrainConfig::validate() const {
  auto fail = [](const char* msg) { throw std::invalid_argument(std::string("train config: ") + msg); };
  if (interior_samples < 1) fail("interior_samples must be >= 1");
  if (boundary_samples < 1) fail("boundary_samples must be >= 1");
  if (!(boundary_weight > 0.0) || !std::isfinite(boundary_weight)) fail("boundary_weight must be > 0");
  if (!(latent_penalty >= 0.0) || !std::isfinite(latent_penalty)) fail("latent_penalty must be >= 0");
  if (!(loss_exponent >= 1.0) || !std::isfinite(loss_exponent)) fail("loss_exponent must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be > 0");
  if (latent_lr && (!(*latent_lr >= 0.0) || !std::isfinite(*latent_lr))) fail("latent_lr must be >= 0");
  for (double m : milestones) {
    if (!(m >= 0.0 && m <= 1.0)) fail("milestones must lie in [0, 1]");
  }
  if (!(decay > 0.0 && decay <= 1.0)) fail("decay must lie in (0, 1]");
  if (iterations < 0) fail("iterations must be >= 0");
  if (eval_every < 0) fail("eval_every must be >= 0");
  if (!(latent_init_std >= 0.0) || !std::isfinite(latent_init_std)) fail("latent_init_std must be >= 0");
  if (reptile_inner_steps < 1) fail("reptile_inner_steps must be >= 1");
  if (!(reptile_step >= 0.0 && reptile_step <= 1.0)) fail("reptile_step must lie in [0, 1]");
}

}  // namespace madrom::train
