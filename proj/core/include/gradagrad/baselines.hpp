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

#pragma once

#include <span>

#include "gradagrad/optim.hpp"

namespace gradagrad {

/// Diagonal AdaGrad, A⁻¹ᵢ = γ / √(Σₜ g²ᵢₜ). Shares the diagonal state layout:
/// coords[i].alpha holds the running sum of squares. Coordinates whose sum
/// is still zero take a zero step.
void step_adagrad(OptimizerState& state, std::span<const double> g, double gamma);

/// Plain x ← x − lr·g.
void step_sgd(OptimizerState& state, std::span<const double> g, double lr);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamMoments {
  Vector first;
  Vector second;

  explicit AdamMoments(std::size_t dim = 0) : first(dim, 0.0), second(dim, 0.0) {}
};

/// Adam with bias-corrected moments.
void step_adam(OptimizerState& state, AdamMoments& moments, std::span<const double> g, double lr,
               const AdamParams& params);

/// Mean over coordinates of Adam's effective step lr_t / (√v̂ + ε) after
/// `k` steps. Empty before the first step.
std::optional<double> adam_mean_step_size(const AdamMoments& moments, std::size_t k, double lr,
                                          const AdamParams& params);

}  // namespace gradagrad
