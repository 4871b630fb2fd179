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

#include "gradagrad/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "gradagrad/data.hpp"
#include "gradagrad/seed.hpp"

namespace gradagrad {

namespace {

/// Walks traces in order and hands each row to `fn` together with the same
/// coordinate's row from the immediately preceding step, if there is one.
template <typename Fn>
void for_each_row(std::span<const StepTrace> traces, Fn&& fn) {
  struct Prev {
    std::size_t k;
    CoordTrace rec;
  };
  std::vector<std::optional<Prev>> prev;
  for (const StepTrace& step : traces) {
    for (const CoordTrace& rec : step.coords) {
      if (rec.i >= prev.size()) prev.resize(rec.i + 1);
      const CoordTrace* before = nullptr;
      if (prev[rec.i] && prev[rec.i]->k + 1 == step.k) before = &prev[rec.i]->rec;
      fn(step.k, rec, before);
    }
    for (const CoordTrace& rec : step.coords) prev[rec.i] = Prev{step.k, rec};
  }
}

double inverse_a(const CoordTrace& rec) { return rec.gamma / std::sqrt(rec.alpha); }

void note_worst(CheckReport& report, double violation, std::size_t k, std::size_t i, bool& any) {
  if (!any || violation > report.worst_violation) {
    report.worst_violation = violation;
    report.step = k;
    report.coord = i;
  }
  any = true;
}

CheckReport make_report(std::string name, double tolerance) {
  CheckReport report;
  report.name = std::move(name);
  report.tolerance = tolerance;
  return report;
}

void finish(CheckReport& report) { report.passed = report.worst_violation <= report.tolerance; }

}  // namespace

CheckReport check_errnegativity(std::span<const StepTrace> traces, double rel_tol) {
  CheckReport report = make_report("errnegativity", rel_tol);
  bool any = false;
  std::size_t checked = 0, orphaned = 0;
  for_each_row(traces, [&](std::size_t k, const CoordTrace& rec, const CoordTrace* before) {
    if (rec.branch != Branch::negative) return;
    if (!before) {
      ++orphaned;
      return;
    }
    const double g_sq = rec.g * rec.g;
    const double growth = g_sq * inverse_a(rec);
    const double correlation = (g_sq - rec.v_raw) * inverse_a(*before);
    const double scale = std::max({1.0, std::abs(growth), std::abs(correlation)});
    note_worst(report, (growth - correlation) / scale, k, rec.i, any);
    ++checked;
  });
  if (!any) {
    report.skipped = true;
    report.details = "no negative-branch rows; vacuous";
  } else {
    report.details = std::to_string(checked) + " negative-branch rows checked";
  }
  if (orphaned > 0) report.details += "; " + std::to_string(orphaned) + " rows without a preceding step skipped";
  finish(report);
  return report;
}

CheckReport check_monotone_and_cap(std::span<const StepTrace> traces, double d_inf) {
  CheckReport report = make_report("monotone-cap", 0.0);
  bool any = false;
  for_each_row(traces, [&](std::size_t k, const CoordTrace& rec, const CoordTrace* before) {
    double violation = (rec.gamma - d_inf) / d_inf;
    if (before) {
      violation = std::max(violation, (before->alpha - rec.alpha) / std::max(1.0, before->alpha));
      violation = std::max(violation, (before->gamma - rec.gamma) / std::max(1.0, before->gamma));
    }
    note_worst(report, violation, k, rec.i, any);
  });
  if (!any) report.details = "empty trace";
  finish(report);
  if (report.passed) {
    report.step.reset();
    report.coord.reset();
  }
  return report;
}

CheckReport check_reparam_invariance(std::span<const StepTrace> traces, double d_inf, double rel_tol) {
  CheckReport report = make_report("reparam", rel_tol);
  bool any = false;
  std::size_t capped = 0;
  for_each_row(traces, [&](std::size_t k, const CoordTrace& rec, const CoordTrace* before) {
    if (rec.branch != Branch::negative || !before) return;
    if (rec.gamma >= d_inf) {
      ++capped;
      return;
    }
    const double after = rec.gamma / std::sqrt(before->alpha - rec.v_clipped);
    const double prior = before->gamma / std::sqrt(before->alpha);
    note_worst(report, std::abs(after - prior) / std::max(std::abs(after), std::abs(prior)), k, rec.i, any);
  });
  if (!any) {
    report.skipped = true;
    report.details = "no uncapped negative-branch rows; vacuous";
  }
  if (capped > 0) report.details += (report.details.empty() ? "" : "; ") + std::to_string(capped) + " capped rows skipped";
  finish(report);
  return report;
}

CheckReport check_branch_consistency(std::span<const StepTrace> traces) {
  CheckReport report = make_report("branch", 0.0);
  std::size_t bad = 0;
  std::string first;
  for_each_row(traces, [&](std::size_t k, const CoordTrace& rec, const CoordTrace* before) {
    std::string why;
    const bool sign_branch = rec.branch == Branch::positive || rec.branch == Branch::negative;
    if (sign_branch && (rec.branch == Branch::negative) != (rec.v_raw < 0.0)) why = "branch disagrees with sign of v_raw";
    if (rec.branch != Branch::negative && rec.v_clipped != rec.v_raw) why = "v_clipped differs off the negative branch";
    if (rec.branch == Branch::negative && (rec.v_clipped < rec.v_raw || rec.v_clipped > 0.0)) {
      why = "v_clipped outside [v_raw, 0]";
    }
    if (rec.branch == Branch::init && k != 0) why = "init branch after step 0";
    if (before) {
      if (rec.branch == Branch::negative && rec.alpha != before->alpha) why = "alpha changed on the negative branch";
      if (rec.branch != Branch::negative && rec.gamma != before->gamma) why = "gamma changed off the negative branch";
    }
    const double expected_a = rec.alpha > 0.0 ? std::sqrt(rec.alpha) / rec.gamma : 0.0;
    if (std::abs(rec.a - expected_a) > 1e-12 * std::max(std::abs(expected_a), std::abs(rec.a))) {
      why = "a differs from sqrt(alpha)/gamma";
    }
    if (!why.empty()) {
      if (bad == 0) {
        report.step = k;
        report.coord = rec.i;
        first = why;
      }
      ++bad;
    }
  });
  report.worst_violation = static_cast<double>(bad);
  report.details = bad == 0 ? "all rows consistent" : std::to_string(bad) + " inconsistent rows; first: " + first;
  finish(report);
  return report;
}

AlphaIdentity check_alpha_identity_rho1(std::span<const double> gs, double rel_tol) {
  AlphaIdentity result;
  if (gs.empty()) {
    result.passed = true;
    return result;
  }
  const std::size_t n = gs.size() - 1;
  result.lhs = gs[0] * gs[0];
  for (std::size_t k = 1; k <= n; ++k) {
    const double v = gs[k] * gs[k] - gs[k] * gs[k - 1];
    if (v < 0.0 && result.precondition_met) {
      result.precondition_met = false;
      result.first_negative = k;
    }
    result.lhs += v;
  }
  double diffs = 0.0;
  for (std::size_t k = 0; k < n; ++k) diffs += (gs[k + 1] - gs[k]) * (gs[k + 1] - gs[k]);
  result.rhs = 0.5 * gs[0] * gs[0] + 0.5 * gs[n] * gs[n] + 0.5 * diffs;
  result.passed = result.precondition_met && std::abs(result.lhs - result.rhs) <= rel_tol * (1.0 + std::abs(result.lhs));
  return result;
}

CheckReport check_adagrad_equivalence(const Problem& problem, std::size_t steps, double gamma,
                                      std::span<const double> x0, double rho, double rel_tol) {
  CheckReport report = make_report("adagrad-equivalence", rel_tol);
  detail::require(problem.deterministic(), "adagrad equivalence needs a deterministic problem");
  detail::require(x0.size() == problem.dim(), "adagrad equivalence: x0 dimension mismatch");

  HyperParams params;
  params.gamma0 = gamma;
  params.rho = rho;
  params.beta = 0.0;
  params.mode = Mode::practical;
  params.d_inf = std::max(params.d_inf, gamma);
  params.validate();

  OptimizerState grada = init_diagonal(Vector(x0.begin(), x0.end()), gamma);
  OptimizerState ada = init_diagonal(Vector(x0.begin(), x0.end()), gamma);
  const Domain free = Domain::unconstrained();
  bool any = false;
  for (std::size_t k = 0; k < steps; ++k) {
    step_diagonal(grada, problem.grad_full(grada.x), params, free);
    step_adagrad(ada, problem.grad_full(ada.x), gamma);
    for (std::size_t i = 0; i < x0.size(); ++i) {
      const double a = grada.x[i], b = ada.x[i];
      const double scale = std::max(std::abs(a), std::abs(b));
      double dev = scale > 0.0 ? std::abs(a - b) / scale : 0.0;
      if (std::isnan(dev)) dev = std::numeric_limits<double>::infinity();
      note_worst(report, dev, k, i, any);
    }
  }
  report.details = std::to_string(steps) + " steps, rho=" + format_double(rho);
  finish(report);
  return report;
}

CheckReport check_finite_diff(const Problem& problem, std::span<const double> point, double h, double tol) {
  CheckReport report = make_report("finite-diff", tol);
  if (!problem.smooth_at(point, h)) {
    report.skipped = true;
    report.details = "point within h of a kink; skipped";
    return report;
  }
  const Vector analytic = problem.grad_full(point);
  Vector probe(point.begin(), point.end());
  bool any = false;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = problem.loss_full(probe);
    probe[i] = saved - h;
    const double down = problem.loss_full(probe);
    probe[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    note_worst(report, std::abs(fd - analytic[i]) / std::max(1.0, std::abs(analytic[i])), 0, i, any);
  }
  report.details = problem.name() + ", h=" + format_double(h);
  finish(report);
  return report;
}

CheckReport check_convergence_trend(const Problem& problem, const OptimizerSpec& optimizer,
                                    const TrendOptions& options) {
  CheckReport report = make_report("convergence-trend", options.threshold);
  const auto f_star = problem.f_star();
  detail::require(f_star.has_value(), "trend check needs a problem with known f*");
  detail::require(options.n_small >= 1000, "trend check needs n_small >= 1000");
  detail::require(options.factor >= 2 && options.seeds >= 1, "trend check needs factor >= 2 and seeds >= 1");

  const std::size_t n_large = options.factor * options.n_small;
  double e_small = 0.0, e_large = 0.0;
  for (std::size_t s = 0; s < options.seeds; ++s) {
    Optimizer opt(optimizer, Vector(problem.dim(), options.x0));
    SampleStream stream(replicate_seed(options.seed, 0, s));
    for (std::size_t k = 1; k <= n_large; ++k) {
      opt.step(problem.grad_sample(opt.x(), stream));
      if (k == options.n_small) e_small += problem.loss_full(averaged_iterate(opt.state())) - *f_star;
    }
    e_large += problem.loss_full(averaged_iterate(opt.state())) - *f_star;
  }
  e_small /= static_cast<double>(options.seeds);
  e_large /= static_cast<double>(options.seeds);

  std::ostringstream details;
  details << "e(" << options.n_small << ")=" << format_double(e_small) << " e(" << n_large
          << ")=" << format_double(e_large) << " threshold=" << format_double(options.threshold);
  if (e_small < 1e-14) {
    report.skipped = true;
    report.details = details.str() + "; already converged, vacuous";
    return report;
  }
  report.worst_violation = e_large / e_small;
  report.details = details.str();
  finish(report);
  return report;
}

IterateHistory record_diagonal_run(const Problem& problem, const HyperParams& params, const Domain& domain,
                                   Vector x0, std::size_t steps, std::uint64_t seed) {
  params.validate();
  IterateHistory history;
  history.beta = params.beta;
  history.unconstrained = domain.kind() == Domain::Kind::unconstrained;
  if (!history.unconstrained) x0 = project(x0, domain);
  OptimizerState state = init_diagonal(std::move(x0), params.gamma0);
  SampleStream stream(seed);
  history.x.push_back(state.x);
  history.z.push_back(state.z);
  for (std::size_t k = 0; k < steps; ++k) {
    Sample sample = problem.sample(state.x, stream);
    StepTrace trace = step_diagonal(state, sample.grad, params, domain);
    trace.f_sample = sample.loss;
    Vector a(state.dim());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = trace.coords[i].a;
    history.x.push_back(state.x);
    history.z.push_back(state.z);
    history.m.push_back(state.m_prev);
    history.g.push_back(std::move(sample.grad));
    history.a.push_back(std::move(a));
    history.traces.push_back(std::move(trace));
  }
  return history;
}

CheckReport check_momentum_identities(const IterateHistory& history, double rel_tol) {
  CheckReport report = make_report("momentum", rel_tol);
  const double beta = history.beta;
  bool any = false;
  const std::size_t n = history.m.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vector& x_k = history.x[k];
    const Vector& x_next = history.x[k + 1];
    const Vector& z_next = history.z[k + 1];
    for (std::size_t i = 0; i < x_k.size(); ++i) {
      // z_{k+1} from consecutive iterates.
      const double lead = x_next[i] / (1.0 - beta);
      const double lag = beta * x_k[i] / (1.0 - beta);
      const double z_scale = std::max({std::abs(z_next[i]), std::abs(lead), std::abs(lag)});
      double violation = z_scale > 0.0 ? std::abs(z_next[i] - (lead - lag)) / z_scale : 0.0;

      // m_k = A_{k+1}(x_k − x_{k+1}).
      const double a = history.a[k][i];
      const double m = history.m[k][i];
      const double direction = a * (x_k[i] - x_next[i]);
      const double m_scale = std::max(std::abs(m), std::abs(direction));
      if (m_scale > 0.0) violation = std::max(violation, std::abs(m - direction) / m_scale);

      // β = 0 and no projection: m_k reproduces g_k up to the rounding of
      // x_k − (x_k − g_k/A), which scales with A·|x|.
      if (beta == 0.0 && history.unconstrained && a > 0.0) {
        const double g = history.g[k][i];
        const double g_scale = std::max({std::abs(g), a * std::abs(x_k[i]), a * std::abs(x_next[i])});
        if (g_scale > 0.0) violation = std::max(violation, std::abs(m - g) / g_scale);
      }
      note_worst(report, violation, k, i, any);
    }
  }
  report.details = std::to_string(n) + " steps, beta=" + format_double(beta);
  finish(report);
  return report;
}

std::optional<CheckReport> run_trace_check(std::string_view name, std::span<const StepTrace> traces, double d_inf) {
  if (name == "errnegativity") return check_errnegativity(traces);
  if (name == "monotone-cap") return check_monotone_and_cap(traces, d_inf);
  if (name == "reparam") return check_reparam_invariance(traces, d_inf);
  if (name == "branch") return check_branch_consistency(traces);
  return std::nullopt;
}

namespace {

std::string quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_check_reports_csv(std::ostream& out, std::span<const CheckReport> reports) {
  out << kCheckReportHeader << '\n';
  for (const CheckReport& r : reports) {
    out << r.name << ',' << (r.passed ? 1 : 0) << ',' << (r.skipped ? 1 : 0) << ','
        << format_double(r.worst_violation) << ',' << format_double(r.tolerance) << ',';
    if (r.step) out << *r.step;
    out << ',';
    if (r.coord) out << *r.coord;
    out << ',' << quote(r.details) << '\n';
  }
}

}  // namespace gradagrad
