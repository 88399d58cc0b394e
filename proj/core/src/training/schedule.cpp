#include "madrom/training/schedule.hpp"

#include <stdexcept>

namespace madrom::train {

double lr_at(std::int64_t step, std::int64_t total, double lr0, std::span<const double> milestones,
             double factor) {
  if (step < 0 || step > total) throw std::invalid_argument("lr_at: step outside [0, total]");
  double lr = lr0;
  if (total == 0) return lr;
  for (double m : milestones) {
    if (static_cast<double>(step) >= m * static_cast<double>(total)) lr *= factor;
  }
  return lr;
}

}  // namespace madrom::train
