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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gradagrad/harness.hpp"
#include "gradagrad/optim.hpp"
#include "gradagrad/problems.hpp"

namespace gradagrad {

/// Outcome of one check. `passed` is exactly `worst_violation <= tolerance`,
/// except for skipped (vacuous or excluded) checks, which pass.
struct CheckReport {
  std::string name;
  bool passed = true;
  bool skipped = false;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  std::optional<std::size_t> step;
  std::optional<std::size_t> coord;
  std::string details;
};

/// On every negative-branch row, g²/A_{k+1} − ρ·g·m_prev/A_k ≤ 0, where
/// ρ·g·m_prev is recovered as g² − v_raw and A = √α/γ. The violation is
/// normalized by max(1, |g²/A_{k+1}|, |ρ·g·m_prev/A_k|). Only meaningful for
/// adaptive-r traces.
CheckReport check_errnegativity(std::span<const StepTrace> traces, double rel_tol = 1e-12);

/// α and γ never decrease per coordinate, and γ ≤ d_inf.
CheckReport check_monotone_and_cap(std::span<const StepTrace> traces, double d_inf);

/// On negative rows where the cap did not bind,
/// γ_{k+1}/√(α_k − v_clipped) = γ_k/√α_k.
CheckReport check_reparam_invariance(std::span<const StepTrace> traces, double d_inf, double rel_tol = 1e-12);

/// Row-level bookkeeping: branch agrees with the sign of v_raw, v_clipped =
/// v_raw off the negative branch, α moves only off it, γ only on it,
/// a = √α/γ and init appears only at k = 0. Counts offending rows.
CheckReport check_branch_consistency(std::span<const StepTrace> traces);

struct AlphaIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  /// False when some v_k = g_k² − g_k·g_{k−1} is negative; the identity is
  /// then not asserted.
  bool precondition_met = true;
  std::optional<std::size_t> first_negative;
  bool passed = false;
};

/// ρ = 1 accumulator identity for a scalar gradient sequence:
/// g₀² + Σ(g_k² − g_k·g_{k−1}) = ½g₀² + ½g_n² + ½Σ(g_{k+1} − g_k)².
AlphaIdentity check_alpha_identity_rho1(std::span<const double> gs, double rel_tol = 1e-12);

/// Diagonal GradaGrad (practical, β = 0, unconstrained, the given ρ) against
/// AdaGrad with the same γ on a deterministic problem; worst relative iterate
/// deviation across all steps.
CheckReport check_adagrad_equivalence(const Problem& problem, std::size_t steps, double gamma,
                                      std::span<const double> x0, double rho = 0.0, double rel_tol = 1e-12);

/// Central differences of loss_full against grad_full; error per coordinate
/// is |fd − analytic| / max(1, |analytic|). Skipped at nonsmooth points.
CheckReport check_finite_diff(const Problem& problem, std::span<const double> point, double h = 1e-6,
                              double tol = 1e-5);

struct TrendOptions {
  std::size_t n_small = 2000;
  std::size_t factor = 4;
  std::size_t seeds = 10;
  double threshold = 0.75;
  std::uint64_t seed = 0;
  double x0 = 1.0;
};

/// e(n) = mean over seeds of f(x̄_n) − f*; passes when e(factor·n)/e(n) is at
/// most the threshold. Vacuous when e(n) < 1e-14.
CheckReport check_convergence_trend(const Problem& problem, const OptimizerSpec& optimizer,
                                    const TrendOptions& options = {});

/// Iterates of a diagonal GradaGrad run. x and z hold x₀ … x_n, m and g hold
/// m₀ … m_{n−1} and g₀ … g_{n−1}, a holds A₁ … A_n.
struct IterateHistory {
  double beta = 0.0;
  bool unconstrained = true;
  std::vector<Vector> x;
  std::vector<Vector> z;
  std::vector<Vector> m;
  std::vector<Vector> g;
  std::vector<Vector> a;
  std::vector<StepTrace> traces;
};

IterateHistory record_diagonal_run(const Problem& problem, const HyperParams& params, const Domain& domain,
                                   Vector x0, std::size_t steps, std::uint64_t seed);

/// z_k = x_k/(1−β) − β·x_{k−1}/(1−β), m_k = A_{k+1}(x_k − x_{k+1}), and
/// m_k = g_k when β = 0 on an unconstrained run.
CheckReport check_momentum_identities(const IterateHistory& history, double rel_tol = 1e-10);

/// Names accepted by run_trace_check.
inline constexpr std::string_view kTraceChecks[] = {"errnegativity", "monotone-cap", "reparam", "branch"};

/// Dispatches one trace-level check by name; empty for unknown names.
std::optional<CheckReport> run_trace_check(std::string_view name, std::span<const StepTrace> traces, double d_inf);

inline constexpr std::string_view kCheckReportHeader = "check,passed,skipped,worst_violation,tolerance,step,coord,details";
void write_check_reports_csv(std::ostream& out, std::span<const CheckReport> reports);

}  // namespace gradagrad
