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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gradagrad/data.hpp"
#include "gradagrad/optim.hpp"

namespace gradagrad {

/// Explicit randomness for gradient sampling: a seeded engine for additive
/// noise plus the epoch/batch cursor of finite-sum problems. Owned by the
/// caller, so one immutable Problem can serve many concurrent runs.
class SampleStream {
 public:
  explicit SampleStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

  /// Next batch of the current epoch over n examples; a fresh permutation
  /// (seeded from seed() and the epoch counter) starts each epoch.
  const std::vector<std::size_t>& next_batch(std::size_t n, std::size_t batch_size);

  /// Epochs begun so far.
  std::size_t epochs_started() const { return epochs_started_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::vector<std::vector<std::size_t>> batches_;
  std::size_t cursor_ = 0;
  std::size_t epochs_started_ = 0;
};

struct Sample {
  Vector grad;
  double loss = 0.0;
};

/// A convex objective f(x) = E_ξ f(x, ξ).
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;

  /// One stochastic draw: ∇f(x, ξ) and f(x, ξ).
  virtual Sample sample(std::span<const double> x, SampleStream& stream) const = 0;
  Vector grad_sample(std::span<const double> x, SampleStream& stream) const { return sample(x, stream).grad; }

  virtual double loss_full(std::span<const double> x) const = 0;
  /// Exact (sub)gradient of loss_full.
  virtual Vector grad_full(std::span<const double> x) const = 0;

  virtual std::optional<double> f_star() const { return std::nullopt; }
  virtual std::optional<double> accuracy(std::span<const double>) const { return std::nullopt; }

  /// True when sample() returns exactly grad_full.
  virtual bool deterministic() const = 0;
  /// False when x lies within h of a kink, where finite differences are
  /// meaningless.
  virtual bool smooth_at(std::span<const double>, double) const { return true; }
  /// Gradient draws per pass over the data, for finite-sum problems.
  virtual std::optional<std::size_t> steps_per_epoch() const { return std::nullopt; }
};

/// f(x) = Σ|xᵢ| with subgradient sign(xᵢ) and 0 at the kink. f* = 0.
std::unique_ptr<Problem> make_abs_value(std::size_t dim = 1);

/// f(x) = ½ Σ dᵢ xᵢ². Draws add N(0, noise_std²) to every gradient
/// coordinate (f(x, ξ) = f(x) + ⟨ξ, x⟩). f* = 0.
std::unique_ptr<Problem> make_quadratic(Vector diag, double noise_std = 0.0);

/// Binary logistic regression without bias or regularization,
/// f(w) = (1/N) Σ log(1 + exp(−yⱼ⟨w, xⱼ⟩)). Labels must already be ±1.
/// Draws are minibatches sampled without replacement within an epoch.
std::unique_ptr<Problem> make_logistic_regression(std::shared_ptr<const Dataset> dataset,
                                                  std::size_t batch_size);

/// f(x) = value everywhere; zero gradient.
std::unique_ptr<Problem> make_constant(std::size_t dim, double value = 0.0);

}  // namespace gradagrad
