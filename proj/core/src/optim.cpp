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

#include "gradagrad/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gradagrad {

namespace detail {

void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

void push_average(OptimizerState& state) {
  ++state.avg_count;
  const double weight = 1.0 / static_cast<double>(state.avg_count);
  for (std::size_t i = 0; i < state.x.size(); ++i) {
    state.x_avg[i] += (state.x[i] - state.x_avg[i]) * weight;
  }
}

}  // namespace detail

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

std::string_view to_string(Mode mode) {
  return mode == Mode::theory ? "theory" : "practical";
}

std::optional<Mode> parse_mode(std::string_view text) {
  if (text == "theory") return Mode::theory;
  if (text == "practical") return Mode::practical;
  return std::nullopt;
}

void HyperParams::validate() const {
  // Written as negated comparisons so NaN fails every check.
  detail::require(gamma0 > 0.0, "gamma0 must be positive");
  detail::require(rho >= 0.0, "rho must be nonnegative");
  detail::require(beta >= 0.0 && beta < 1.0, "beta must lie in [0, 1)");
  detail::require(g_inf > 0.0, "g_inf must be positive");
  detail::require(d_inf > 0.0, "d_inf must be positive");
  detail::require(!r_fixed || *r_fixed >= 0.0, "r must be nonnegative");
  detail::require(gamma0 <= d_inf, "gamma0 must not exceed d_inf");
}

HyperParams HyperParams::scalar_defaults() {
  HyperParams params;
  params.r_fixed = 1.0;
  return params;
}

std::optional<double> preconditioner_entry(const CoordState& coord) {
  if (coord.alpha <= 0.0) return std::nullopt;
  return std::sqrt(coord.alpha) / coord.gamma;
}

Domain Domain::unconstrained() { return Domain{}; }

Domain Domain::box(Vector lower, Vector upper) {
  detail::require(lower.size() == upper.size(), "box bounds differ in dimension");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    detail::require(lower[i] < upper[i], "box requires lower < upper element-wise");
  }
  Domain domain;
  domain.kind_ = Kind::box;
  domain.lower_ = std::move(lower);
  domain.upper_ = std::move(upper);
  return domain;
}

bool Domain::contains(std::span<const double> point) const {
  if (kind_ == Kind::unconstrained) return true;
  if (point.size() != lower_.size()) return false;
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (point[i] < lower_[i] || point[i] > upper_[i]) return false;
  }
  return true;
}

Vector project(std::span<const double> point, const Domain& domain) {
  Vector out(point.begin(), point.end());
  if (domain.kind() == Domain::Kind::unconstrained) return out;
  detail::require(point.size() == domain.lower().size(), "projection dimension mismatch");
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(out[i], domain.lower()[i], domain.upper()[i]);
  }
  return out;
}

namespace {

OptimizerState init_common(Vector x0, std::size_t n_coords, double gamma0) {
  OptimizerState state;
  const std::size_t dim = x0.size();
  state.z = x0;
  state.x_avg = x0;
  state.x = std::move(x0);
  state.m_prev.assign(dim, 0.0);
  state.g_prev.assign(dim, 0.0);
  state.coords.assign(n_coords, CoordState{gamma0, 0.0});
  state.avg_count = 1;
  return state;
}

}  // namespace

OptimizerState init_diagonal(Vector x0, double gamma0) {
  const std::size_t dim = x0.size();
  return init_common(std::move(x0), dim, gamma0);
}

OptimizerState init_scalar(Vector x0, double gamma0) {
  return init_common(std::move(x0), 1, gamma0);
}

Vector averaged_iterate(const OptimizerState& state) {
  if (state.k == 0) throw std::logic_error("averaged_iterate requires at least one step");
  return state.x_avg;
}

std::string_view to_string(Branch branch) {
  switch (branch) {
    case Branch::init: return "init";
    case Branch::capped: return "capped";
    case Branch::positive: return "positive";
    case Branch::negative: return "negative";
  }
  return "?";
}

std::optional<Branch> parse_branch(std::string_view text) {
  if (text == "init") return Branch::init;
  if (text == "capped") return Branch::capped;
  if (text == "positive") return Branch::positive;
  if (text == "negative") return Branch::negative;
  return std::nullopt;
}

double compute_v_scalar(std::span<const double> g, std::span<const double> g_prev, double rho) {
  detail::require(g.size() == g_prev.size(), "compute_v_scalar: dimension mismatch");
  return dot(g, g) - rho * dot(g, g_prev);
}

CoordV compute_v_coord(double g_i, double m_prev_i, double rho, std::size_t k, double gamma_i,
                       const HyperParams& params) {
  if (k == 0) {
    const double v = params.mode == Mode::theory ? params.g_inf * params.g_inf : g_i * g_i;
    return {v, Branch::init};
  }
  if (gamma_i >= params.d_inf) return {g_i * g_i, Branch::capped};
  const double v = g_i * g_i - rho * g_i * m_prev_i;
  return {v, v >= 0.0 ? Branch::positive : Branch::negative};
}

double adaptive_clip_ratio(double inner, double sq_norm, double rho) {
  const double h_inv = rho * inner / sq_norm;
  return h_inv * h_inv - 1.0;
}

double clip_to_ratio(double v, double r, double alpha) {
  detail::require(v < 0.0, "clip: v must be negative");
  detail::require(alpha > 0.0, "clip: alpha must be positive");
  detail::require(r >= 0.0, "clip: r must be nonnegative");
  return std::max(v, -r * alpha);
}

ClipResult clip_negative_v(double v, double g_i, double m_prev_i, double rho, double alpha_i,
                           std::optional<double> r_fixed) {
  const double r = r_fixed ? *r_fixed : adaptive_clip_ratio(g_i * m_prev_i, g_i * g_i, rho);
  return {clip_to_ratio(v, r, alpha_i), r};
}

double apply_reparam(double gamma, double alpha, double v) {
  detail::require(alpha > 0.0, "reparam: alpha must be positive");
  detail::require(v <= 0.0, "reparam: v must be nonpositive");
  return gamma * std::sqrt(1.0 - v / alpha);
}

double accumulate_positive(double alpha, double v) {
  detail::require(v >= 0.0, "accumulate_positive: v must be nonnegative");
  return alpha + v;
}

StepTrace step_scalar(OptimizerState& state, std::span<const double> g, const HyperParams& params) {
  detail::require(g.size() == state.dim(), "step_scalar: gradient dimension mismatch");
  detail::require(state.coords.size() == 1, "step_scalar: state was not initialized as scalar");

  CoordState& coord = state.coords.front();
  const double sq_norm = dot(g, g);
  const double inner = dot(g, state.g_prev);

  CoordTrace rec;
  rec.g = std::sqrt(sq_norm);
  double v = sq_norm - params.rho * inner;
  rec.v_raw = v;
  if (v >= 0.0) {
    rec.branch = Branch::positive;
    coord.alpha = accumulate_positive(coord.alpha, v);
  } else {
    rec.branch = Branch::negative;
    const double r = params.r_fixed ? *params.r_fixed : adaptive_clip_ratio(inner, sq_norm, params.rho);
    v = clip_to_ratio(v, r, coord.alpha);
    rec.r = r;
    coord.gamma = apply_reparam(coord.gamma, coord.alpha, v);
  }
  rec.v_clipped = v;

  // α = 0 only while every gradient so far was zero; the step is zero then.
  const double a = preconditioner_entry(coord).value_or(0.0);
  if (a > 0.0) {
    for (std::size_t i = 0; i < g.size(); ++i) state.x[i] -= g[i] / a;
  }
  state.z = state.x;
  state.m_prev.assign(g.begin(), g.end());
  state.g_prev.assign(g.begin(), g.end());

  rec.gamma = coord.gamma;
  rec.alpha = coord.alpha;
  rec.a = a;

  StepTrace trace;
  trace.k = state.k;
  trace.coords.push_back(rec);
  ++state.k;
  detail::push_average(state);
  return trace;
}

StepTrace step_diagonal(OptimizerState& state, std::span<const double> g, const HyperParams& params,
                        const Domain& domain) {
  const std::size_t dim = state.dim();
  detail::require(g.size() == dim, "step_diagonal: gradient dimension mismatch");
  detail::require(state.coords.size() == dim, "step_diagonal: state was not initialized as diagonal");

  StepTrace trace;
  trace.k = state.k;
  trace.coords.resize(dim);

  Vector a(dim);
  Vector z_next(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    CoordState& coord = state.coords[i];
    CoordTrace& rec = trace.coords[i];
    rec.i = i;
    rec.g = g[i];

    auto [v, branch] = compute_v_coord(g[i], state.m_prev[i], params.rho, state.k, coord.gamma, params);
    rec.v_raw = v;
    rec.branch = branch;
    if (v >= 0.0) {
      coord.alpha = accumulate_positive(coord.alpha, v);
    } else {
      const ClipResult clip =
          clip_negative_v(v, g[i], state.m_prev[i], params.rho, coord.alpha, std::nullopt);
      v = clip.v;
      rec.r = clip.r;
      coord.gamma = std::min(apply_reparam(coord.gamma, coord.alpha, v), params.d_inf);
    }
    rec.v_clipped = v;

    a[i] = preconditioner_entry(coord).value_or(0.0);
    rec.gamma = coord.gamma;
    rec.alpha = coord.alpha;
    rec.a = a[i];

    z_next[i] = a[i] > 0.0 ? state.z[i] - g[i] / a[i] : state.z[i];
  }

  state.z = project(z_next, domain);
  const double beta = params.beta;
  for (std::size_t i = 0; i < dim; ++i) {
    const double x_next = beta * state.x[i] + (1.0 - beta) * state.z[i];
    state.m_prev[i] = a[i] * (state.x[i] - x_next);
    state.x[i] = x_next;
  }
  state.g_prev.assign(g.begin(), g.end());
  ++state.k;
  detail::push_average(state);
  return trace;
}

}  // namespace gradagrad
