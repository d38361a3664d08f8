#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tag/tensor.hpp"

namespace tag {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::int64_t worst_index = -1;
  std::int64_t entries_checked = 0;
  bool pass(double tolerance) const { return max_rel_error < tolerance; }
};

struct GradCheckOptions {
  double step = 1e-5;  // central-difference half step
  // Entries whose |grad| falls below this floor are compared on an
  // absolute scale of the floor, since finite differences cannot resolve
  // relative error there.
  double denominator_floor = 1e-3;
  // Check at most this many entries per tensor, spread evenly: 0 = all.
  std::int64_t max_entries_per_tensor = 0;
};

// Compares reverse-mode gradients of the scalar loss `f()` against
// central finite differences for every listed tensor. `f` must be a pure
// function of the listed tensors' current values. Gradients are computed
// once via backward(), then each probed entry is perturbed in place.
GradCheckReport finite_difference_check(const std::function<Tensor()>& f,
                                        const std::vector<std::pair<std::string, Tensor>>& tensors,
                                        const GradCheckOptions& options = {});

// Single-tensor convenience overload.
GradCheckReport finite_difference_check(const std::function<Tensor()>& f, Tensor& x,
                                        const GradCheckOptions& options = {});

}  // namespace tag
