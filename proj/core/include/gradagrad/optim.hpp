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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace gradagrad {

using Vector = std::vector<double>;

/// Theory mode seeds every accumulator with G∞² at step 0; practical mode
/// uses the observed g₀² instead.
enum class Mode { theory, practical };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view text);

/// Tunables shared by the scalar and diagonal GradaGrad steppers.
struct HyperParams {
  double gamma0 = 1.0;
  double rho = 2.0;
  double beta = 0.0;
  double g_inf = 1.0;
  double d_inf = 1e10;
  /// Fixed clip parameter of the scalar variant. Empty selects the adaptive
  /// r = (ρ⟨g, g_prev⟩ / ‖g‖²)² − 1. The diagonal stepper always uses the
  /// adaptive per-coordinate r.
  std::optional<double> r_fixed;
  Mode mode = Mode::practical;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  /// Scalar-variant defaults: fixed r = 1.
  static HyperParams scalar_defaults();
};

/// Per-coordinate numerator γ and accumulator α. The effective step size is
/// A⁻¹ = γ / √α.
struct CoordState {
  double gamma = 1.0;
  double alpha = 0.0;
};

/// A = √α / γ, or empty while α = 0 (coordinate not bootstrapped yet; the
/// caller takes a zero step on it).
std::optional<double> preconditioner_entry(const CoordState& coord);

class Domain {
 public:
  enum class Kind { unconstrained, box };

  static Domain unconstrained();
  /// Throws std::invalid_argument unless lower < upper element-wise.
  static Domain box(Vector lower, Vector upper);

  Kind kind() const { return kind_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  bool contains(std::span<const double> point) const;

 private:
  Kind kind_ = Kind::unconstrained;
  Vector lower_;
  Vector upper_;
};

/// Euclidean projection onto the domain (element-wise clamp for boxes).
Vector project(std::span<const double> point, const Domain& domain);

/// Mutable state of one optimizer run.
struct OptimizerState {
  Vector x;
  Vector z;
  Vector m_prev;
  Vector g_prev;
  /// One entry per coordinate, or a single entry for the scalar variant.
  std::vector<CoordState> coords;
  std::size_t k = 0;
  Vector x_avg;
  std::size_t avg_count = 0;

  std::size_t dim() const { return x.size(); }
};

/// State for the diagonal stepper (and AdaGrad, which shares its layout).
OptimizerState init_diagonal(Vector x0, double gamma0);
/// State for the scalar stepper: one CoordState shared by all coordinates.
OptimizerState init_scalar(Vector x0, double gamma0);

/// Mean of x₀ … x_k. Throws std::logic_error before the first step.
Vector averaged_iterate(const OptimizerState& state);

enum class Branch { init, capped, positive, negative };

std::string_view to_string(Branch branch);
std::optional<Branch> parse_branch(std::string_view text);

struct CoordTrace {
  std::size_t i = 0;
  double g = 0.0;
  double v_raw = 0.0;
  double v_clipped = 0.0;
  Branch branch = Branch::positive;
  std::optional<double> r;
  double gamma = 0.0;
  double alpha = 0.0;
  double a = 0.0;
};

/// What one step did, coordinate by coordinate. The scalar stepper emits a
/// single record whose `g` is the gradient's Euclidean norm.
struct StepTrace {
  std::size_t k = 0;
  std::vector<CoordTrace> coords;
  std::optional<double> f_sample;
};

// Building blocks. Each one is a single line of the update rules, exposed so
// the verify layer and tests can drive them in isolation.

/// ‖g‖² − ρ⟨g, g_prev⟩.
double compute_v_scalar(std::span<const double> g, std::span<const double> g_prev, double rho);

struct CoordV {
  double v;
  Branch branch;
};

/// Branch selection of the diagonal update. The cap test is γ ≥ D∞ rather
/// than exact equality.
CoordV compute_v_coord(double g_i, double m_prev_i, double rho, std::size_t k, double gamma_i,
                       const HyperParams& params);

/// r = (ρ·inner / sq_norm)² − 1; with inner = g·m and sq_norm = g² this is
/// the per-coordinate (ρm/g)² − 1.
double adaptive_clip_ratio(double inner, double sq_norm, double rho);

struct ClipResult {
  double v;
  double r;
};

/// max(v, −r·α). Requires v < 0, α > 0 and r ≥ 0.
double clip_to_ratio(double v, double r, double alpha);

/// Restricts a negative v to max(v, −r·α), with r fixed or adaptive.
/// Requires v < 0 and α > 0.
ClipResult clip_negative_v(double v, double g_i, double m_prev_i, double rho, double alpha_i,
                           std::optional<double> r_fixed);

/// γ·√(1 − v/α): the numerator that keeps γ/√α fixed while α absorbs −v.
double apply_reparam(double gamma, double alpha, double v);

/// α + v for v ≥ 0.
double accumulate_positive(double alpha, double v);

/// Simplified scalar variant. No momentum, no projection, no cap on γ.
StepTrace step_scalar(OptimizerState& state, std::span<const double> g, const HyperParams& params);

/// Full diagonal variant with momentum β, projection onto `domain`,
/// the G∞ initialization in theory mode and the D∞ cap on γ.
StepTrace step_diagonal(OptimizerState& state, std::span<const double> g, const HyperParams& params,
                        const Domain& domain);

namespace detail {
void require(bool condition, const char* message);
void push_average(OptimizerState& state);
}  // namespace detail

}  // namespace gradagrad
