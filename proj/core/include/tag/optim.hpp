#pragma once

#include <cstdint>
#include <vector>

#include "tag/params.hpp"

namespace tag {

// Staircase schedule: effective lr at iteration i is
// base_lr * decay_factor^(number of decay_steps <= i).
struct LrSchedule {
  double base_lr = 1e-4;
  double decay_factor = 0.1;
  std::vector<int> decay_steps;  // sorted ascending

  double at(int iteration) const;
};

// Adam moments aligned with a ParamRegistry by index.
struct AdamState {
  explicit AdamState(const ParamRegistry& params, double beta1 = 0.9, double beta2 = 0.999,
                     double epsilon = 1e-8);

  int step_count = 0;
  double beta1, beta2, epsilon;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

// One bias-corrected Adam update over every parameter in the registry,
// reading each tensor's accumulated .grad. Parameters without gradients
// (unused this step) are treated as zero-gradient. A non-finite gradient
// aborts with the offending parameter's name.
void adam_step(ParamRegistry& params, AdamState& state, const LrSchedule& schedule, int iteration);

}  // namespace tag
