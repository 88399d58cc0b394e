#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace madrom::train {

enum class FinetuneMode : std::uint8_t { kLatent, kLatentAndWeights };

const char* mode_name(FinetuneMode m);
/// "mad-l" or "mad-lm"; throws std::invalid_argument otherwise.
FinetuneMode parse_mode(const std::string& s);

struct TrainConfig {
  int interior_samples = 1024;   // M_r
  int boundary_samples = 128;    // M_bc
  double boundary_weight = 1.0;  // lambda_bc
  double latent_penalty = 1e-4;  // 1 / sigma^2
  double loss_exponent = 2.0;    // p
  double lr = 1e-3;              // weights (and latents unless latent_lr is set)
  std::optional<double> latent_lr;
  std::vector<double> milestones{0.4, 0.6, 0.8};
  double decay = 0.5;
  int iterations = 1000;
  /// Relative L2 is recorded every `eval_every` iterations and at the end;
  /// 0 records it only at the end.
  int eval_every = 10;
  double latent_init_std = 1e-2;
  /// Keep the latent penalty during fine-tuning.
  bool penalty_in_finetune = true;
  int reptile_inner_steps = 8;
  double reptile_step = 0.1;
  /// Zero the elapsed_ms column so traces are byte-reproducible.
  bool strict = false;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
  double effective_latent_lr() const { return latent_lr.value_or(lr); }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

}  // namespace madrom::train
