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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails or exceeds its time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gradagrad/data.hpp"
#include "gradagrad/harness.hpp"
#include "gradagrad/optim.hpp"
#include "gradagrad/verify.hpp"

namespace fs = std::filesystem;
using namespace gradagrad;

namespace {

struct Outcome {
  bool passed = false;
  std::string details;
};

// Traces gathered by earlier criteria and re-checked by criterion 2.
struct TracePool {
  struct Entry {
    std::string label;
    std::vector<StepTrace> traces;
    double d_inf;
  };
  std::vector<Entry> entries;
};

TracePool pool;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------

Outcome errnegativity_fuzz() {
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::size_t coord_steps = 0, negative_rows = 0, runs = 0;
  double worst = -std::numeric_limits<double>::infinity();
  bool ok = true;
  while (coord_steps < 120000) {
    const std::size_t dim = 1 + rng() % 8;
    const std::size_t steps = 50 + rng() % 250;
    HyperParams p;
    p.gamma0 = std::exp(std::log(1e-4) + std::log(1e5) * unit(rng));
    p.rho = 0.5 + 4.0 * unit(rng);
    p.beta = runs % 3 == 0 ? 0.0 : 0.95 * unit(rng);
    p.g_inf = 0.1 + 3.0 * unit(rng);
    p.d_inf = runs % 4 == 0 ? p.gamma0 * (1.0 + 20.0 * unit(rng)) : 1e10;
    p.mode = runs % 2 == 0 ? Mode::theory : Mode::practical;
    const Domain domain = runs % 5 == 0 ? Domain::box(Vector(dim, -2.0), Vector(dim, 2.0)) : Domain::unconstrained();

    OptimizerState state = init_diagonal(Vector(dim, 0.5), p.gamma0);
    Vector drift(dim);
    for (double& d : drift) d = 2.0 * normal(rng);
    const double noise = 3.0 * unit(rng);
    std::vector<StepTrace> traces;
    for (std::size_t k = 0; k < steps; ++k) {
      Vector g(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        g[i] = drift[i] + noise * normal(rng) + state.x[i];
        if (rng() % 50 == 0) g[i] = 0.0;
      }
      traces.push_back(step_diagonal(state, g, p, domain));
    }
    const CheckReport r = check_errnegativity(traces);
    if (!r.skipped) worst = std::max(worst, r.worst_violation);
    ok = ok && r.passed;
    for (const StepTrace& t : traces) {
      for (const CoordTrace& c : t.coords) negative_rows += c.branch == Branch::negative;
    }
    coord_steps += dim * steps;
    pool.entries.push_back({"fuzz-diagonal", std::move(traces), p.d_inf});
    ++runs;
  }

  // Scalar variant with adaptive r.
  for (int run = 0; run < 50; ++run) {
    HyperParams p;
    p.gamma0 = std::exp(std::log(1e-3) * unit(rng));
    p.rho = 0.5 + 4.0 * unit(rng);
    OptimizerState state = init_scalar(Vector(4, 1.0), p.gamma0);
    std::vector<StepTrace> traces;
    for (int k = 0; k < 200; ++k) {
      Vector g(4);
      for (std::size_t i = 0; i < 4; ++i) g[i] = 0.5 + normal(rng) + state.x[i];
      traces.push_back(step_scalar(state, g, p));
      negative_rows += traces.back().coords[0].branch == Branch::negative;
    }
    const CheckReport r = check_errnegativity(traces);
    if (!r.skipped) worst = std::max(worst, r.worst_violation);
    ok = ok && r.passed;
    coord_steps += 200;
    pool.entries.push_back({"fuzz-scalar", std::move(traces), p.d_inf});
  }

  ok = ok && coord_steps >= 100000 && negative_rows > 0;
  return {ok, std::to_string(coord_steps) + " coordinate-steps, " + std::to_string(negative_rows) +
                  " negative-branch rows, worst normalized violation " + fmt(worst) + " (tol 1e-12)"};
}

Outcome reparam_and_monotone() {
  std::size_t runs = 0;
  double worst_reparam = 0.0;
  std::string failure;
  for (const auto& entry : pool.entries) {
    const CheckReport mono = check_monotone_and_cap(entry.traces, entry.d_inf);
    const CheckReport rep = check_reparam_invariance(entry.traces, entry.d_inf);
    if (!rep.skipped) worst_reparam = std::max(worst_reparam, rep.worst_violation);
    if (failure.empty() && !mono.passed) failure = entry.label + " monotone-cap: " + fmt(mono.worst_violation);
    if (failure.empty() && !rep.passed) failure = entry.label + " reparam: " + fmt(rep.worst_violation);
    ++runs;
  }
  std::string details = std::to_string(runs) + " runs (fuzzed + benchmark), worst reparam deviation " +
                        fmt(worst_reparam) + " (tol 1e-12)";
  if (!failure.empty()) details += "; first failure " + failure;
  return {failure.empty() && runs > 0, details};
}

Outcome adagrad_equivalence() {
  const auto problem = make_quadratic({1.0, 10.0, 0.1, 3.0});
  const CheckReport r = check_adagrad_equivalence(*problem, 1000, 0.7, Vector{1.0, -2.0, 5.0, 0.3});
  return {r.passed, "max relative iterate deviation " + fmt(r.worst_violation) + " over 1000 steps (tol 1e-12)"};
}

Outcome alpha_identity() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> growth(0.6, 1.6);
  std::uniform_int_distribution<int> length(2, 60);
  std::size_t accepted = 0, attempts = 0;
  double worst = 0.0;
  bool ok = true;
  while (accepted < 100) {
    ++attempts;
    std::vector<double> gs = {std::uniform_real_distribution<double>(-2.0, 2.0)(rng)};
    for (int k = length(rng); k > 0; --k) gs.push_back((rng() % 2 ? 1.0 : -1.0) * std::abs(gs.back()) * growth(rng));
    const AlphaIdentity id = check_alpha_identity_rho1(gs);
    if (!id.precondition_met) continue;
    ++accepted;
    worst = std::max(worst, std::abs(id.lhs - id.rhs) / (1.0 + std::abs(id.lhs)));
    ok = ok && id.passed;
  }
  const AlphaIdentity fixture = check_alpha_identity_rho1(std::vector<double>{1.0, -1.0, 1.0});
  const bool fixture_ok = fixture.passed && fixture.lhs == 5.0 && fixture.rhs == 5.0;
  return {ok && fixture_ok, std::to_string(accepted) + " sequences accepted of " + std::to_string(attempts) +
                                ", worst scaled gap " + fmt(worst) + "; fixture [1,-1,1] lhs=" + fmt(fixture.lhs) +
                                " rhs=" + fmt(fixture.rhs)};
}

Outcome poor_initial_step_size() {
  const auto problem = make_abs_value();
  const double gamma0 = 1e-3;
  const std::size_t steps = 500;
  const std::size_t early = 50;

  HyperParams p;
  p.gamma0 = gamma0;
  p.rho = 2.0;
  OptimizerState grada = init_diagonal({1.0}, gamma0);
  OptimizerState ada = init_diagonal({1.0}, gamma0);
  std::vector<StepTrace> traces;
  bool grada_increase = false, ada_increase = false;
  double grada_prev = 0.0, ada_prev = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    traces.push_back(step_diagonal(grada, problem->grad_full(grada.x), p, Domain::unconstrained()));
    step_adagrad(ada, problem->grad_full(ada.x), gamma0);
    const double g_inv = 1.0 / traces.back().coords[0].a;
    const auto a = preconditioner_entry(ada.coords[0]);
    const double a_inv = 1.0 / *a;
    if (k > 0 && k < early && g_inv > grada_prev) grada_increase = true;
    if (k > 0 && a_inv > ada_prev) ada_increase = true;
    grada_prev = g_inv;
    ada_prev = a_inv;
  }
  pool.entries.push_back({"abs", traces, p.d_inf});

  const double e_grada = problem->loss_full(grada.x);
  const double e_ada = problem->loss_full(ada.x);
  const bool ratio_ok = e_grada * 10.0 <= e_ada;
  return {ratio_ok && grada_increase && !ada_increase,
          "subopt GradaGrad " + fmt(e_grada) + " vs AdaGrad " + fmt(e_ada) + " (ratio " + fmt(e_ada / e_grada) +
              ", need >= 10); GradaGrad step size rises early: " + (grada_increase ? "yes" : "no") +
              "; AdaGrad step size ever rises: " + (ada_increase ? "yes" : "no")};
}

Outcome convergence_trend() {
  const auto problem = make_quadratic({1.0, 0.25}, 1.0);
  OptimizerSpec spec;  // GradaGrad defaults
  TrendOptions opts;
  opts.n_small = 2000;
  opts.factor = 4;
  opts.seeds = 10;
  opts.threshold = 0.75;
  const CheckReport r = check_convergence_trend(*problem, spec, opts);
  return {r.passed && !r.skipped, "e(8000)/e(2000) = " + fmt(r.worst_violation) + " (need <= 0.75); " + r.details};
}

Outcome untuned_vs_tuned_accuracy() {
  const std::vector<std::string> datasets = {"breast_cancer_scale", "wine_binary_scale"};
  bool ok = true;
  std::string details;
  for (const std::string& name : datasets) {
    RunConfig base;
    base.problem.name = "logistic";
    base.problem.dataset_path = std::string(GRADAGRAD_FIXTURES) + "/" + name + ".libsvm";
    base.problem.batch_size = 16;
    base.epochs = 50;
    base.seeds = 10;
    base.seed = 2026;
    const auto problem = build_problem(base.problem);

    RunConfig grada = base;  // γ₀ = 1, ρ = 2
    std::vector<StepTrace> traces;
    const RunRecord grada_record = run(*problem, grada, &traces);
    pool.entries.push_back({name, std::move(traces), grada.optimizer.params.d_inf});

    RunConfig ada = base;
    ada.optimizer.kind = OptimizerKind::adagrad;
    const GridResult tuned = grid(*problem, ada, GridSpec{"lr", GridSpec::powers_of_two(-8, 6)});
    const RunRecord& winner = tuned.points[tuned.winner].record;

    const double acc_grada = *grada_record.final_accuracy;
    const double acc_ada = *winner.final_accuracy;
    const double gap_pp = 100.0 * (acc_ada - acc_grada);
    ok = ok && gap_pp <= 2.0;
    if (!details.empty()) details += "; ";
    details += name + ": GradaGrad " + fmt(100.0 * acc_grada) + "% vs AdaGrad(lr=" +
               fmt(tuned.points[tuned.winner].value) + ") " + fmt(100.0 * acc_ada) + "%, gap " + fmt(gap_pp) + " pp";
  }
  return {ok, details + " (need gap <= 2 pp)"};
}

Outcome finite_differences() {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  bool ok = true;
  std::size_t checks = 0;

  std::vector<std::shared_ptr<const Problem>> problems;
  for (const char* file : {"breast_cancer_scale", "wine_binary_scale"}) {
    auto data = std::make_shared<Dataset>(load_dataset(std::string(GRADAGRAD_FIXTURES) + "/" + file + ".libsvm"));
    problems.push_back(make_logistic_regression(data, 1));
  }
  problems.push_back(make_quadratic({1.0, 10.0, 0.1, 3.0}));
  problems.push_back(make_quadratic(Vector(30, 2.5)));

  for (const auto& problem : problems) {
    for (int t = 0; t < 20; ++t) {
      Vector x(problem->dim());
      for (double& v : x) v = normal(rng);
      const CheckReport r = check_finite_diff(*problem, x, 1e-6, 1e-5);
      worst = std::max(worst, r.worst_violation);
      ok = ok && r.passed && !r.skipped;
      ++checks;
    }
  }
  return {ok, std::to_string(checks) + " points on logistic and quadratic problems, max relative error " +
                  fmt(worst) + " (tol 1e-5)"};
}

int run_cli(const std::string& args, const fs::path& stderr_file) {
  const std::string command = std::string("\"") + GRADAGRAD_CLI + "\" " + args + " 2> \"" + stderr_file.string() + "\"";
  const int status = std::system(command.c_str());
  if (status == -1) return -1;
#ifdef WEXITSTATUS
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism_and_formats() {
  const fs::path dir = fs::temp_directory_path() / ("gradagrad-acceptance-" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  std::vector<std::string> problems;

  const std::string base = std::string("run --problem logistic --dataset \"") + GRADAGRAD_FIXTURES +
                           "/breast_cancer_scale.libsvm\" --batch-size 8 --epochs 3 --seed 99 --seeds 2 --trace";
  const int s1 = run_cli(base + " --out \"" + (dir / "a.csv").string() + "\"", dir / "a.err");
  const int s2 = run_cli(base + " --out \"" + (dir / "b.csv").string() + "\"", dir / "b.err");
  const bool same_record = s1 == 0 && s2 == 0 && slurp(dir / "a.csv") == slurp(dir / "b.csv") &&
                           !slurp(dir / "a.csv").empty();
  const bool same_trace = slurp(dir / "a.csv.trace.csv") == slurp(dir / "b.csv.trace.csv") &&
                          !slurp(dir / "a.csv.trace.csv").empty();
  if (!same_record) problems.push_back("run-record CSVs differ");
  if (!same_trace) problems.push_back("trace CSVs differ");

  std::size_t round_trips = 0;
  for (const char* file : {"breast_cancer_scale", "wine_scale", "wine_binary_scale", "tiny"}) {
    const Dataset first = load_dataset(std::string(GRADAGRAD_FIXTURES) + "/" + file + ".libsvm");
    std::stringstream buffer;
    write_libsvm(buffer, first);
    const Dataset second = parse_libsvm(buffer);
    if (second == first) {
      ++round_trips;
    } else {
      problems.push_back(std::string(file) + " round-trip differs");
    }
  }

  const int bad = run_cli(std::string("run --problem logistic --steps 5 --dataset \"") + GRADAGRAD_FIXTURES +
                              "/malformed.libsvm\"",
                          dir / "bad.err");
  const std::string message = slurp(dir / "bad.err");
  const bool line_numbered = message.find("line 3") != std::string::npos;
  if (bad != 2) problems.push_back("malformed input exit status " + std::to_string(bad) + " (want 2)");
  if (!line_numbered) problems.push_back("malformed input message lacks 'line 3': " + message);

  fs::remove_all(dir);
  std::string details = "identical seeds -> byte-identical run and trace CSVs: " +
                        std::string(same_record && same_trace ? "yes" : "no") + "; " + std::to_string(round_trips) +
                        "/4 fixtures round-trip losslessly; malformed.libsvm -> exit " + std::to_string(bad) +
                        (line_numbered ? " with 'line 3'" : "");
  for (const std::string& p : problems) details += "; " + p;
  return {problems.empty(), details};
}

struct Criterion {
  int number;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "error-negativity invariant", 10.0, errnegativity_fuzz},
      {3, "rho=0 AdaGrad equivalence", 1.0, adagrad_equivalence},
      {4, "rho=1 accumulator identity", 5.0, alpha_identity},
      {5, "poor initial step size on |x|", 1.0, poor_initial_step_size},
      {6, "convergence trend", 30.0, convergence_trend},
      {7, "untuned accuracy vs tuned AdaGrad", 300.0, untuned_vs_tuned_accuracy},
      {8, "gradient oracle finite differences", 10.0, finite_differences},
      {9, "determinism and formats", 60.0, determinism_and_formats},
      // Runs last: re-checks every trace collected above.
      {2, "reparameterization invariance and monotonicity", 10.0, reparam_and_monotone},
  };

  std::vector<std::string> lines(10);
  bool all = true;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.body();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool passed = outcome.passed && in_time;
    all = all && passed;
    std::ostringstream line;
    line << "criterion " << c.number << ": " << (passed ? "PASS" : "FAIL") << "  " << c.name << " -- "
         << outcome.details << " [" << fmt(seconds) << " s, budget " << fmt(c.budget_seconds) << " s"
         << (in_time ? "" : ", OVER BUDGET") << "]";
    lines[static_cast<std::size_t>(c.number)] = line.str();
  }
  for (std::size_t n = 1; n < lines.size(); ++n) std::cout << lines[n] << '\n';
  std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << std::endl;
  return all ? 0 : 1;
}
