#include "tag/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tag {

double LrSchedule::at(int iteration) const {
  double lr = base_lr;
  for (int s : decay_steps)
    if (s <= iteration) lr *= decay_factor;
  return lr;
}

AdamState::AdamState(const ParamRegistry& params, double beta1, double beta2, double epsilon)
    : beta1(beta1), beta2(beta2), epsilon(epsilon) {
  first_moment.reserve(params.size());
  second_moment.reserve(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    auto n = static_cast<size_t>(params.tensor(i).numel());
    first_moment.emplace_back(n, 0.0);
    second_moment.emplace_back(n, 0.0);
  }
}

void adam_step(ParamRegistry& params, AdamState& state, const LrSchedule& schedule, int iteration) {
  if (state.first_moment.size() != params.size())
    throw std::runtime_error("Adam state does not match parameter registry");
  const double lr = schedule.at(iteration);
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);

  for (size_t p = 0; p < params.size(); ++p) {
    Tensor& w = params.tensor(p);
    if (!w.has_grad()) continue;  // untouched this step
    auto g = w.grad();
    auto& m = state.first_moment[p];
    auto& v = state.second_moment[p];
    auto wd = w.mutable_data();
    for (size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i]))
        throw std::runtime_error("non-finite gradient in parameter '" + params.name(p) +
                                 "' at iteration " + std::to_string(iteration));
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      wd[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace tag
