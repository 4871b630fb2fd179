// Copyright 2026 The gradagrad Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gradagrad/baselines.hpp"

#include <cmath>

namespace gradagrad {

void step_adagrad(OptimizerState& state, std::span<const double> g, double gamma) {
  detail::require(g.size() == state.dim(), "step_adagrad: gradient dimension mismatch");
  detail::require(state.coords.size() == state.dim(), "step_adagrad: state was not initialized as diagonal");
  for (std::size_t i = 0; i < g.size(); ++i) {
    CoordState& coord = state.coords[i];
    coord.gamma = gamma;
    coord.alpha += g[i] * g[i];
    // Same A = √α/γ form as GradaGrad so ρ = 0 runs agree bit for bit.
    if (const auto a = preconditioner_entry(coord)) state.x[i] -= g[i] / *a;
  }
  state.z = state.x;
  state.m_prev.assign(g.begin(), g.end());
  state.g_prev.assign(g.begin(), g.end());
  ++state.k;
  detail::push_average(state);
}

void step_sgd(OptimizerState& state, std::span<const double> g, double lr) {
  detail::require(g.size() == state.dim(), "step_sgd: gradient dimension mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) state.x[i] -= lr * g[i];
  state.z = state.x;
  state.g_prev.assign(g.begin(), g.end());
  ++state.k;
  detail::push_average(state);
}

void step_adam(OptimizerState& state, AdamMoments& moments, std::span<const double> g, double lr,
               const AdamParams& params) {
  detail::require(g.size() == state.dim(), "step_adam: gradient dimension mismatch");
  detail::require(moments.first.size() == state.dim(), "step_adam: moment dimension mismatch");
  const double t = static_cast<double>(state.k + 1);
  const double correction1 = 1.0 - std::pow(params.beta1, t);
  const double correction2 = 1.0 - std::pow(params.beta2, t);
  for (std::size_t i = 0; i < g.size(); ++i) {
    moments.first[i] = params.beta1 * moments.first[i] + (1.0 - params.beta1) * g[i];
    moments.second[i] = params.beta2 * moments.second[i] + (1.0 - params.beta2) * g[i] * g[i];
    const double m_hat = moments.first[i] / correction1;
    const double v_hat = moments.second[i] / correction2;
    state.x[i] -= lr * m_hat / (std::sqrt(v_hat) + params.eps);
  }
  state.z = state.x;
  state.g_prev.assign(g.begin(), g.end());
  ++state.k;
  detail::push_average(state);
}

std::optional<double> adam_mean_step_size(const AdamMoments& moments, std::size_t k, double lr,
                                          const AdamParams& params) {
  if (k == 0 || moments.second.empty()) return std::nullopt;
  const double correction2 = 1.0 - std::pow(params.beta2, static_cast<double>(k));
  double sum = 0.0;
  for (double s : moments.second) sum += lr / (std::sqrt(s / correction2) + params.eps);
  return sum / static_cast<double>(moments.second.size());
}

}  // namespace gradagrad
