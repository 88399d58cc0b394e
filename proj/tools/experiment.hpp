#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "madrom/network/network.hpp"
#include "madrom/problems/problem.hpp"
#include "madrom/training/config.hpp"

namespace madrom::cli {

/// Task-set law: which distribution S1 or S2 is drawn from.
enum class Variant : std::uint8_t {
  kInDistribution,  // ODE grid, Burgers in-distribution GRF, Laplace polygons
  kHeterogeneousNu,
  kExtrapolationGrf,
  kEllipse,
};

const char* variant_name(Variant v);

struct OdeSettings {
  int grid = 20;               // equidistant eta on [lo, hi]
  double lo = 0.0;
  double hi = 2.0;
  std::vector<int> held_out{10};  // grid indices forming S2; the rest form S1
};

struct BurgersSettings {
  double nu = 0.01;
  int nx = 1024;
  int nt = 101;
  int substeps = 20;
  int eval_stride_x = 4;
  int eval_stride_t = 5;
};

struct LaplaceSettings {
  int eval_points = 4096;
};

/// Everything a run needs. Parsed strictly from JSON: unknown keys and wrong
/// types are ConfigError, and so is any violated constraint.
struct ExperimentConfig {
  problems::Family family = problems::Family::kOde;
  OdeSettings ode;
  BurgersSettings burgers;
  LaplaceSettings laplace;
  int s1 = 10;  // ignored for ODE, where the grid decides
  int s2 = 5;
  Variant s1_variant = Variant::kInDistribution;
  Variant s2_variant = Variant::kInDistribution;
  net::NetworkConfig network;
  train::TrainConfig pretrain;
  train::TrainConfig finetune;
  train::TrainConfig source;  // transfer-learning source run
  double threshold = 0.1;     // iterations-to-threshold level
  std::uint64_t task_seed = 1;
  std::uint64_t held_out_seed = 2;
  std::uint64_t baseline_seed = 3;
  std::filesystem::path out = "runs";

  void validate() const;
  /// Applies --seed to every training config and --strict to all of them.
  void override_seed(std::uint64_t seed);
  void make_strict();
};

ExperimentConfig parse_experiment(const std::string& json_text);
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Pre-training tasks and held-out tasks, drawn from their seeded streams.
std::vector<problems::InstancePtr> sample_s1(const ExperimentConfig& c);
std::vector<problems::InstancePtr> sample_s2(const ExperimentConfig& c);

}  // namespace madrom::cli
