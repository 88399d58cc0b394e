#pragma once

#include <chrono>
#include <cstdint>

#include "madrom/problems/problem.hpp"
#include "madrom/training/config.hpp"

namespace madrom::train::detail {

/// Independent stream `id` derived from a user seed.
inline problems::Rng stream(std::uint64_t seed, std::uint32_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
  return problems::Rng(seq);
}

enum Stream : std::uint32_t { kBatches = 1, kLatentInit = 2, kTaskChoice = 3 };

inline bool records_error(const TrainConfig& c, std::int64_t t, std::int64_t total) {
  return t == total || (c.eval_every > 0 && t % c.eval_every == 0);
}

class Stopwatch {
 public:
  explicit Stopwatch(bool strict) : strict_(strict), start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    if (strict_) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool strict_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace madrom::train::detail
