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

// gradagrad: run, grid-search and verify GradaGrad experiments.
//
// Exit status: 0 on success, 1 when a requested check fails, 2 on usage,
// configuration or input errors.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gradagrad/data.hpp"
#include "gradagrad/harness.hpp"
#include "gradagrad/trace_io.hpp"
#include "gradagrad/verify.hpp"

namespace {

using namespace gradagrad;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  // problem
  std::string problem = "quadratic";
  std::string dataset;
  std::size_t dim = 1;
  std::vector<double> diag;
  double noise_std = 0.0;
  std::size_t batch_size = 1;
  std::optional<double> positive_label;
  std::optional<double> box_lower;
  std::optional<double> box_upper;
  double x0 = 0.0;

  // optimizer
  std::string optimizer = "gradagrad";
  double gamma0 = 1.0;
  double rho = 2.0;
  double beta = 0.0;
  double g_inf = 1.0;
  double d_inf = 1e10;
  std::optional<double> r;
  bool adaptive_r = false;
  std::string mode = "practical";
  double lr = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  // schedule
  std::optional<std::size_t> steps;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> eval_every;
  std::uint64_t seed = 0;
  std::size_t seeds = 1;

  // output
  bool trace = false;
  std::string trace_out;
  std::string out;

  // grid
  std::string grid_param = "lr";
  std::vector<double> grid_values;
  int grid_lo = -8;
  int grid_hi = 4;
  std::size_t threads = 0;

  // check / trace-dump
  std::string trace_in;
  std::vector<std::string> checks;
  std::optional<std::size_t> dump_step;
};

void add_problem_options(CLI::App& app, Options& o) {
  app.add_option("--problem", o.problem, "abs | quadratic | logistic | constant")
      ->check(CLI::IsMember({"abs", "quadratic", "logistic", "constant"}))
      ->capture_default_str();
  app.add_option("--dataset", o.dataset, "LIBSVM file for --problem logistic");
  app.add_option("--dim", o.dim, "dimension of abs / constant / isotropic quadratic")->capture_default_str();
  app.add_option("--diag", o.diag, "quadratic Hessian diagonal (comma separated)")->delimiter(',');
  app.add_option("--noise-std", o.noise_std, "Gaussian gradient noise of the quadratic")->capture_default_str();
  app.add_option("--batch-size", o.batch_size, "minibatch size for logistic")->capture_default_str();
  app.add_option("--positive-label", o.positive_label, "one-vs-rest positive class (default: automatic)");
  app.add_option("--box-lower", o.box_lower, "lower bound of a box domain (every coordinate)");
  app.add_option("--box-upper", o.box_upper, "upper bound of a box domain (every coordinate)");
  app.add_option("--x0", o.x0, "initial value of every coordinate")->capture_default_str();
}

void add_optimizer_options(CLI::App& app, Options& o) {
  app.add_option("--optimizer", o.optimizer, "gradagrad | gradagrad-scalar | adagrad | sgd | adam")
      ->check(CLI::IsMember({"gradagrad", "gradagrad-scalar", "adagrad", "sgd", "adam"}))
      ->capture_default_str();
  app.add_option("--gamma0", o.gamma0, "initial numerator")->capture_default_str();
  app.add_option("--rho", o.rho, "adaptivity constant")->capture_default_str();
  app.add_option("--beta", o.beta, "momentum in [0, 1)")->capture_default_str();
  app.add_option("--g-inf", o.g_inf, "gradient bound used at step 0 in theory mode")->capture_default_str();
  app.add_option("--d-inf", o.d_inf, "cap on gamma")->capture_default_str();
  app.add_option("--r", o.r, "fixed clip parameter of gradagrad-scalar (default 1)");
  app.add_flag("--adaptive-r", o.adaptive_r, "gradagrad-scalar: adaptive clip parameter instead of a fixed r");
  app.add_option("--mode", o.mode, "theory | practical")
      ->check(CLI::IsMember({"theory", "practical"}))
      ->capture_default_str();
  app.add_option("--lr", o.lr, "step size of adagrad / sgd / adam")->capture_default_str();
  app.add_option("--beta1", o.beta1, "adam first-moment decay")->capture_default_str();
  app.add_option("--beta2", o.beta2, "adam second-moment decay")->capture_default_str();
  app.add_option("--eps", o.eps, "adam epsilon")->capture_default_str();
}

void add_schedule_options(CLI::App& app, Options& o) {
  auto* steps = app.add_option("--steps", o.steps, "number of optimizer steps");
  auto* epochs = app.add_option("--epochs", o.epochs, "number of passes over the dataset");
  steps->excludes(epochs);
  app.add_option("--eval-every", o.eval_every, "evaluation interval in steps");
  app.add_option("--seed", o.seed, "master seed")->capture_default_str();
  app.add_option("--seeds", o.seeds, "seed replicates to average")->capture_default_str();
}

void add_run_options(CLI::App& app, Options& o) {
  add_problem_options(app, o);
  add_optimizer_options(app, o);
  add_schedule_options(app, o);
}

RunConfig make_config(const Options& o) {
  RunConfig config;
  config.problem.name = o.problem;
  config.problem.dim = o.dim;
  config.problem.diag = o.diag;
  config.problem.noise_std = o.noise_std;
  config.problem.dataset_path = o.dataset;
  config.problem.batch_size = o.batch_size;
  if (o.positive_label) config.problem.labels = {LabelRule::Kind::one_vs_rest, o.positive_label};

  OptimizerSpec& spec = config.optimizer;
  spec.kind = *parse_optimizer(o.optimizer);
  spec.params.gamma0 = o.gamma0;
  spec.params.rho = o.rho;
  spec.params.beta = o.beta;
  spec.params.g_inf = o.g_inf;
  spec.params.d_inf = o.d_inf;
  spec.params.mode = *parse_mode(o.mode);
  if (spec.kind == OptimizerKind::gradagrad_scalar && !o.adaptive_r) spec.params.r_fixed = o.r.value_or(1.0);
  if (spec.kind != OptimizerKind::gradagrad_scalar && (o.r || o.adaptive_r)) {
    throw UsageError("--r / --adaptive-r only apply to --optimizer gradagrad-scalar");
  }
  if (o.r && o.adaptive_r) throw UsageError("--r and --adaptive-r are mutually exclusive");
  spec.lr = o.lr;
  spec.adam = {o.beta1, o.beta2, o.eps};

  if (!o.steps && !o.epochs) throw UsageError("one of --steps or --epochs is required");
  config.steps = o.steps;
  config.epochs = o.epochs;
  config.eval_every = o.eval_every;
  config.seed = o.seed;
  config.seeds = o.seeds;
  config.x0 = o.x0;
  config.trace = o.trace;
  config.validate();
  return config;
}

void apply_domain(RunConfig& config, const Options& o, std::size_t dim) {
  if (o.box_lower.has_value() != o.box_upper.has_value()) {
    throw UsageError("--box-lower and --box-upper must be given together");
  }
  if (o.box_lower) config.domain = Domain::box(Vector(dim, *o.box_lower), Vector(dim, *o.box_upper));
}

/// Writes through `fn` to `path`, or to stdout when the path is empty.
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write '" + path + "'");
  fn(file);
  if (!file) throw std::runtime_error("write to '" + path + "' failed");
}

int cmd_run(const Options& o) {
  RunConfig config = make_config(o);
  if (o.trace && o.trace_out.empty() && o.out.empty()) {
    throw UsageError("--trace needs --trace-out or --out (the trace goes to <out>.trace.csv)");
  }
  const auto problem = build_problem(config.problem);
  apply_domain(config, o, problem->dim());

  std::vector<StepTrace> traces;
  const RunRecord record = run(*problem, config, o.trace ? &traces : nullptr);
  emit(o.out, [&](std::ostream& out) { write_run_record_csv(out, record); });
  if (o.trace) {
    const std::string path = o.trace_out.empty() ? o.out + ".trace.csv" : o.trace_out;
    emit(path, [&](std::ostream& out) { write_trace_csv(out, traces); });
  }
  write_run_summary(std::cerr, config, record);
  return kExitOk;
}

int cmd_grid(const Options& o) {
  RunConfig config = make_config(o);
  const auto problem = build_problem(config.problem);
  apply_domain(config, o, problem->dim());

  GridSpec spec;
  spec.param = o.grid_param;
  spec.values = o.grid_values.empty() ? GridSpec::powers_of_two(o.grid_lo, o.grid_hi) : o.grid_values;
  if (spec.values.empty()) throw UsageError("empty grid");
  const GridResult result = grid(*problem, config, spec, o.threads);
  emit(o.out, [&](std::ostream& out) { write_grid_csv(out, result); });
  const GridPoint& best = result.points[result.winner];
  std::cerr << "winner: " << result.param << "=" << format_double(best.value) << " (" << result.metric << " "
            << format_double(best.score) << ")\n";
  return kExitOk;
}

std::vector<StepTrace> load_traces(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
  return read_trace_csv(in);
}

int cmd_check(const Options& o) {
  std::vector<std::string> names = o.checks;
  if (names.empty()) names.assign(std::begin(kTraceChecks), std::end(kTraceChecks));
  for (const std::string& name : names) {
    if (std::find(std::begin(kTraceChecks), std::end(kTraceChecks), name) == std::end(kTraceChecks)) {
      throw UsageError("unknown check '" + name + "'");
    }
  }

  std::vector<StepTrace> traces;
  double d_inf = o.d_inf;
  if (!o.trace_in.empty()) {
    traces = load_traces(o.trace_in);
  } else {
    // No trace file: produce a fresh traced run from the run flags.
    RunConfig config = make_config(o);
    if (config.optimizer.kind != OptimizerKind::gradagrad &&
        config.optimizer.kind != OptimizerKind::gradagrad_scalar) {
      throw UsageError("check needs a GradaGrad trace; use --optimizer gradagrad or gradagrad-scalar");
    }
    config.seeds = 1;
    const auto problem = build_problem(config.problem);
    apply_domain(config, o, problem->dim());
    run(*problem, config, &traces);
    d_inf = config.optimizer.params.d_inf;
  }

  std::vector<CheckReport> reports;
  for (const std::string& name : names) reports.push_back(*run_trace_check(name, traces, d_inf));
  emit(o.out, [&](std::ostream& out) { write_check_reports_csv(out, reports); });

  bool ok = true;
  for (const CheckReport& r : reports) {
    if (!r.passed) {
      ok = false;
      std::cerr << "FAILED " << r.name << ": worst violation " << format_double(r.worst_violation)
                << " > tolerance " << format_double(r.tolerance);
      if (r.step) std::cerr << " at k=" << *r.step;
      if (r.coord) std::cerr << " i=" << *r.coord;
      std::cerr << " (" << r.details << ")\n";
    }
  }
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_trace_dump(const Options& o) {
  if (o.trace_in.empty()) throw UsageError("trace-dump needs a trace file");
  const std::vector<StepTrace> traces = load_traces(o.trace_in);
  emit(o.out, [&](std::ostream& out) {
    if (o.dump_step) {
      std::vector<StepTrace> selected;
      for (const StepTrace& t : traces) {
        if (t.k == *o.dump_step) selected.push_back(t);
      }
      if (selected.empty()) throw UsageError("step " + std::to_string(*o.dump_step) + " not in trace");
      write_trace_csv(out, selected);
      return;
    }
    out << "k,coords,init,capped,positive,negative,clipped,gamma_mean,gamma_max,alpha_mean,a_mean\n";
    for (const StepTrace& t : traces) {
      std::map<Branch, std::size_t> counts;
      std::size_t clipped = 0;
      double gamma_sum = 0.0, gamma_max = 0.0, alpha_sum = 0.0, a_sum = 0.0;
      for (const CoordTrace& c : t.coords) {
        ++counts[c.branch];
        if (c.v_clipped != c.v_raw) ++clipped;
        gamma_sum += c.gamma;
        gamma_max = std::max(gamma_max, c.gamma);
        alpha_sum += c.alpha;
        a_sum += c.a;
      }
      const double n = static_cast<double>(std::max<std::size_t>(t.coords.size(), 1));
      out << t.k << ',' << t.coords.size() << ',' << counts[Branch::init] << ',' << counts[Branch::capped] << ','
          << counts[Branch::positive] << ',' << counts[Branch::negative] << ',' << clipped << ','
          << format_double(gamma_sum / n) << ',' << format_double(gamma_max) << ',' << format_double(alpha_sum / n)
          << ',' << format_double(a_sum / n) << '\n';
    }
  });
  return kExitOk;
}

/// Expands `--config FILE` into `--key=value` tokens placed right after the
/// subcommand name, so that flags given on the command line (which come
/// later and win under the take-last policy) override file values.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  std::vector<std::string> rest;
  for (std::size_t j = 0; j < args.size(); ++j) {
    const std::string& a = args[j];
    if (a == "--config") {
      if (j + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[++j];
    } else if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
    } else {
      rest.push_back(a);
    }
  }
  if (!path) return rest;

  std::ifstream in(*path);
  if (!in) throw UsageError("cannot open config file '" + *path + "'");
  std::vector<std::string> injected;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty()) throw UsageError("config file '" + *path + "': sections are not supported");
    std::string value;
    for (std::size_t j = 0; j < item.inputs.size(); ++j) value += (j ? "," : "") + item.inputs[j];
    injected.push_back("--" + item.name + "=" + value);
  }
  // rest[0] is the program name, rest[1] the subcommand (if any).
  const std::size_t at = std::min<std::size_t>(rest.size(), 2);
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(at), injected.begin(), injected.end());
  return rest;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"GradaGrad experiments: run, grid search, invariant checks."};
  app.name("gradagrad");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "help for every subcommand");
  app.footer("Any subcommand also accepts --config FILE with one key=value per line (keys are flag names "
             "without the leading dashes); command-line flags override file values.");

  auto* run = app.add_subcommand("run", "run one configuration and write the run-record CSV");
  add_run_options(*run, o);
  run->add_flag("--trace", o.trace, "also write the per-step trace CSV");
  run->add_option("--trace-out", o.trace_out, "trace CSV path (default <out>.trace.csv)");
  run->add_option("--out", o.out, "run-record CSV path (default stdout)");

  auto* grid_cmd = app.add_subcommand("grid", "grid-search one parameter and write the grid CSV");
  add_run_options(*grid_cmd, o);
  grid_cmd->add_option("--grid-param", o.grid_param, "lr | gamma0 | rho | beta")
      ->check(CLI::IsMember({"lr", "gamma0", "rho", "beta"}))
      ->capture_default_str();
  grid_cmd->add_option("--grid-values", o.grid_values, "explicit grid values (comma separated)")->delimiter(',');
  grid_cmd->add_option("--grid-lo", o.grid_lo, "smallest power of two when no values are given")
      ->capture_default_str();
  grid_cmd->add_option("--grid-hi", o.grid_hi, "largest power of two when no values are given")
      ->capture_default_str();
  grid_cmd->add_option("--threads", o.threads, "worker threads (0 = hardware concurrency)")->capture_default_str();
  grid_cmd->add_option("--out", o.out, "grid CSV path (default stdout)");

  auto* check = app.add_subcommand("check", "run invariant checks on a trace and write the report CSV");
  add_run_options(*check, o);
  check->add_option("trace", o.trace_in, "trace CSV; without it a fresh traced run is checked");
  check->add_option("--checks", o.checks, "errnegativity,monotone-cap,reparam,branch (default all)")
      ->delimiter(',');
  check->add_option("--out", o.out, "report CSV path (default stdout)");

  auto* dump = app.add_subcommand("trace-dump", "summarize a trace CSV step by step");
  dump->add_option("trace", o.trace_in, "trace CSV")->required();
  dump->add_option("--step", o.dump_step, "print the raw rows of one step instead");
  dump->add_option("--out", o.out, "output path (default stdout)");

  try {
    std::vector<std::string> args = expand_config(std::vector<std::string>(argv, argv + argc));
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "gradagrad: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(o);
    if (grid_cmd->parsed()) return cmd_grid(o);
    if (check->parsed()) return cmd_check(o);
    if (dump->parsed()) return cmd_trace_dump(o);
  } catch (const ParseError& e) {
    std::cerr << "gradagrad: " << (o.dataset.empty() ? std::string() : o.dataset + ": ") << e.what() << '\n';
  } catch (const TraceFormatError& e) {
    std::cerr << "gradagrad: " << o.trace_in << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "gradagrad: " << e.what() << '\n';
  }
  return kExitUsage;
}
