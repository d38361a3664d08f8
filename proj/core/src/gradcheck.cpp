#include "tag/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tag {

GradCheckReport finite_difference_check(const std::function<Tensor()>& f,
                                        const std::vector<std::pair<std::string, Tensor>>& tensors,
                                        const GradCheckOptions& options) {
  for (auto& [name, t] : tensors)
    if (!t.requires_grad())
      throw std::runtime_error("finite_difference_check: tensor '" + name + "' does not require grad");

  // Analytic gradients, one backward pass. Tensor is a shared handle, so
  // a copy reaches the same grad buffer.
  for (const auto& entry : tensors) {
    Tensor t = entry.second;
    t.zero_grad();
  }
  Tensor loss = f();
  if (loss.numel() != 1) throw std::runtime_error("finite_difference_check: loss must be scalar");
  backward(loss);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(tensors.size());
  for (const auto& entry : tensors) {
    const Tensor& t = entry.second;
    if (t.has_grad()) {
      auto g = t.grad();
      analytic.emplace_back(g.begin(), g.end());
    } else {
      analytic.emplace_back(static_cast<size_t>(t.numel()), 0.0);
    }
  }

  GradCheckReport report;
  const double h = options.step;
  NoGradGuard no_grad;
  for (size_t ti = 0; ti < tensors.size(); ++ti) {
    Tensor t = tensors[ti].second;
    auto values = t.mutable_data();
    const std::int64_t n = static_cast<std::int64_t>(values.size());
    std::int64_t stride = 1;
    if (options.max_entries_per_tensor > 0 && n > options.max_entries_per_tensor)
      stride = (n + options.max_entries_per_tensor - 1) / options.max_entries_per_tensor;
    for (std::int64_t i = 0; i < n; i += stride) {
      const double saved = values[static_cast<size_t>(i)];
      values[static_cast<size_t>(i)] = saved + h;
      const double f_plus = f().item();
      values[static_cast<size_t>(i)] = saved - h;
      const double f_minus = f().item();
      values[static_cast<size_t>(i)] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double a = analytic[ti][static_cast<size_t>(i)];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.denominator_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.entries_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = tensors[ti].first;
        report.worst_index = i;
      }
    }
  }
  return report;
}

GradCheckReport finite_difference_check(const std::function<Tensor()>& f, Tensor& x,
                                        const GradCheckOptions& options) {
  return finite_difference_check(f, {{"x", x}}, options);
}

}  // namespace tag
