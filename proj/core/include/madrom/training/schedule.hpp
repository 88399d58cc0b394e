#pragma once

#include <cstdint>
#include <span>

namespace madrom::train {

/// lr0 * factor^(number of milestones m with step >= m * total).
double lr_at(std::int64_t step, std::int64_t total, double lr0, std::span<const double> milestones,
             double factor);

}  // namespace madrom::train
