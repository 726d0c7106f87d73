#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "slottta/kernels.hpp"
#include "slottta/registry.hpp"

namespace slottta {

// Bias-corrected Adam over a named parameter subset. Moment buffers are keyed
// by name and created lazily; parameters outside the subset are never
// touched.
template <typename T>
struct AdamState {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step = 0;
  std::map<std::string, std::pair<std::vector<T>, std::vector<T>>> moments;
};

template <typename T>
void adam_step(ParamRegistry<T>& params, const std::vector<std::string>& names, AdamState<T>& state) {
  ++state.step;
  const double c1 = 1.0 / (1.0 - std::pow(state.beta1, static_cast<double>(state.step)));
  const double c2 = 1.0 / (1.0 - std::pow(state.beta2, static_cast<double>(state.step)));
  for (const auto& name : names) {
    Tensor<T>& t = params.tensor(name);
    if (t.grad.size() != t.data.size())
      throw ContractError("adam_step: missing gradient for parameter '" + name + "'");
    auto& [m, v] = state.moments[name];
    if (m.size() != t.data.size()) {
      m.assign(t.data.size(), T(0));
      v.assign(t.data.size(), T(0));
    }
    kern::Kern<T>::adam(t.data.data(), t.grad.data(), m.data(), v.data(), t.data.size(),
                        static_cast<T>(state.lr), static_cast<T>(state.beta1), static_cast<T>(state.beta2),
                        static_cast<T>(state.eps), static_cast<T>(c1), static_cast<T>(c2));
  }
}

// Scales all listed gradients so their global L2 norm is at most `max_norm`.
// Returns the pre-clip norm.
template <typename T>
double clip_gradients(ParamRegistry<T>& params, const std::vector<std::string>& names, double max_norm) {
  double sq = 0;
  for (const auto& name : names) {
    const Tensor<T>& t = params.tensor(name);
    if (t.grad.empty()) continue;
    sq += static_cast<double>(kern::Kern<T>::sumsq(t.grad.data(), t.grad.size()));
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const T s = static_cast<T>(max_norm / norm);
    for (const auto& name : names) {
      Tensor<T>& t = params.tensor(name);
      if (!t.grad.empty()) kern::Kern<T>::scale(t.grad.data(), s, t.grad.data(), t.grad.size());
    }
  }
  return norm;
}

}  // namespace slottta
