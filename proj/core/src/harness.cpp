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

#include "gradagrad/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "gradagrad/seed.hpp"

namespace gradagrad {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::gradagrad: return "gradagrad";
    case OptimizerKind::gradagrad_scalar: return "gradagrad-scalar";
    case OptimizerKind::adagrad: return "adagrad";
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::adam: return "adam";
  }
  return "?";
}

std::optional<OptimizerKind> parse_optimizer(std::string_view text) {
  for (auto kind : {OptimizerKind::gradagrad, OptimizerKind::gradagrad_scalar, OptimizerKind::adagrad,
                    OptimizerKind::sgd, OptimizerKind::adam}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

namespace {

bool is_gradagrad(OptimizerKind kind) {
  return kind == OptimizerKind::gradagrad || kind == OptimizerKind::gradagrad_scalar;
}

}  // namespace

Optimizer::Optimizer(OptimizerSpec spec, Vector x0, Domain domain)
    : spec_(std::move(spec)), domain_(std::move(domain)), moments_(x0.size()) {
  if (is_gradagrad(spec_.kind)) {
    spec_.params.validate();
  } else {
    detail::require(spec_.lr > 0.0, "learning rate must be positive");
  }
  if (spec_.kind == OptimizerKind::adam) {
    detail::require(spec_.adam.beta1 >= 0.0 && spec_.adam.beta1 < 1.0, "adam beta1 must lie in [0, 1)");
    detail::require(spec_.adam.beta2 >= 0.0 && spec_.adam.beta2 < 1.0, "adam beta2 must lie in [0, 1)");
    detail::require(spec_.adam.eps > 0.0, "adam eps must be positive");
  }
  if (spec_.kind == OptimizerKind::gradagrad_scalar) {
    detail::require(domain_.kind() == Domain::Kind::unconstrained, "the scalar variant has no projection step");
  }
  if (domain_.kind() == Domain::Kind::box) {
    detail::require(domain_.lower().size() == x0.size(), "domain dimension mismatch");
    x0 = project(x0, domain_);
  }
  state_ = spec_.kind == OptimizerKind::gradagrad_scalar ? init_scalar(std::move(x0), spec_.params.gamma0)
                                                         : init_diagonal(std::move(x0), spec_.params.gamma0);
}

StepTrace Optimizer::step(std::span<const double> g) {
  switch (spec_.kind) {
    case OptimizerKind::gradagrad: return step_diagonal(state_, g, spec_.params, domain_);
    case OptimizerKind::gradagrad_scalar: return step_scalar(state_, g, spec_.params);
    case OptimizerKind::adagrad: step_adagrad(state_, g, spec_.lr); break;
    case OptimizerKind::sgd: step_sgd(state_, g, spec_.lr); break;
    case OptimizerKind::adam: step_adam(state_, moments_, g, spec_.lr, spec_.adam); break;
  }
  if (domain_.kind() == Domain::Kind::box) {
    state_.x = project(state_.x, domain_);
    state_.z = state_.x;
  }
  StepTrace trace;
  trace.k = state_.k - 1;
  return trace;
}

LrStats Optimizer::lr_stats() const {
  LrStats stats;
  switch (spec_.kind) {
    case OptimizerKind::sgd:
      stats.ainv_mean = spec_.lr;
      return stats;
    case OptimizerKind::adam:
      stats.ainv_mean = adam_mean_step_size(moments_, state_.k, spec_.lr, spec_.adam);
      return stats;
    default:
      break;
  }
  double gamma_sum = 0.0, gamma_max = 0.0, alpha_sum = 0.0, alpha_max = 0.0, ainv_sum = 0.0;
  std::size_t active = 0;
  for (const CoordState& c : state_.coords) {
    gamma_sum += c.gamma;
    gamma_max = std::max(gamma_max, c.gamma);
    alpha_sum += c.alpha;
    alpha_max = std::max(alpha_max, c.alpha);
    if (const auto a = preconditioner_entry(c)) {
      ainv_sum += 1.0 / *a;
      ++active;
    }
  }
  const auto n = static_cast<double>(state_.coords.size());
  if (n > 0) {
    stats.gamma_mean = gamma_sum / n;
    stats.gamma_max = gamma_max;
    stats.alpha_mean = alpha_sum / n;
    stats.alpha_max = alpha_max;
  }
  if (active > 0) stats.ainv_mean = ainv_sum / static_cast<double>(active);
  return stats;
}

std::shared_ptr<const Problem> build_problem(const ProblemSpec& spec) {
  if (spec.name == "abs") return make_abs_value(spec.dim);
  if (spec.name == "constant") return make_constant(spec.dim);
  if (spec.name == "quadratic") {
    Vector diag = spec.diag.empty() ? Vector(spec.dim, 1.0) : spec.diag;
    return make_quadratic(std::move(diag), spec.noise_std);
  }
  if (spec.name == "logistic") {
    if (spec.dataset_path.empty()) throw std::invalid_argument("problem 'logistic' needs a dataset path");
    auto data = std::make_shared<Dataset>(normalize_labels(load_dataset(spec.dataset_path), spec.labels));
    return make_logistic_regression(std::move(data), spec.batch_size);
  }
  throw std::invalid_argument("unknown problem '" + spec.name + "'");
}

void RunConfig::validate() const {
  detail::require(steps.has_value() != epochs.has_value(), "exactly one of steps / epochs must be set");
  detail::require(seeds >= 1, "seeds must be at least 1");
  detail::require(!eval_every || *eval_every >= 1, "eval_every must be at least 1");
}

std::size_t total_steps(const RunConfig& config, const Problem& problem) {
  if (config.steps) return *config.steps;
  const auto per_epoch = problem.steps_per_epoch();
  if (!per_epoch) throw std::invalid_argument("epochs given for a problem without a finite dataset; use steps");
  return *config.epochs * *per_epoch;
}

RunRecord run_single(const Problem& problem, const RunConfig& config, std::uint64_t stream_seed,
                     std::vector<StepTrace>* traces) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  Optimizer opt(config.optimizer, Vector(problem.dim(), config.x0), config.domain);
  SampleStream stream(stream_seed);
  const std::size_t n = total_steps(config, problem);
  const auto per_epoch = problem.steps_per_epoch();
  const std::size_t eval_every = config.eval_every.value_or(per_epoch.value_or(100));
  const auto f_star = problem.f_star();

  RunRecord record;
  auto evaluate = [&](std::size_t step) {
    RunRow row;
    row.step = step;
    if (per_epoch) row.epoch = static_cast<double>(step) / static_cast<double>(*per_epoch);
    row.loss = problem.loss_full(opt.x());
    row.accuracy = problem.accuracy(opt.x());
    row.lr = opt.lr_stats();
    if (f_star) row.subopt = row.loss - *f_star;
    record.rows.push_back(row);
  };

  evaluate(0);
  for (std::size_t s = 1; s <= n; ++s) {
    Sample sample = problem.sample(opt.x(), stream);
    StepTrace trace = opt.step(sample.grad);
    if (traces) {
      trace.f_sample = sample.loss;
      traces->push_back(std::move(trace));
    }
    if (s % eval_every == 0 || s == n) evaluate(s);
  }

  record.final_loss = record.rows.back().loss;
  record.final_accuracy = record.rows.back().accuracy;
  record.final_avg_loss = n > 0 ? problem.loss_full(averaged_iterate(opt.state())) : record.final_loss;
  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t stream, std::size_t replicate) {
  return derive_seed(master, stream, replicate);
}

namespace {

void add_opt(std::optional<double>& acc, const std::optional<double>& v) {
  if (acc && v) {
    *acc += *v;
  } else {
    acc.reset();
  }
}

void div_opt(std::optional<double>& acc, double n) {
  if (acc) *acc /= n;
}

RunRecord average_records(const std::vector<RunRecord>& records) {
  RunRecord mean = records.front();
  const auto n = static_cast<double>(records.size());
  if (records.size() == 1) return mean;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const RunRecord& rec = records[r];
    if (rec.rows.size() != mean.rows.size()) throw std::logic_error("replicates disagree on evaluation schedule");
    for (std::size_t j = 0; j < rec.rows.size(); ++j) {
      RunRow& acc = mean.rows[j];
      const RunRow& row = rec.rows[j];
      acc.loss += row.loss;
      add_opt(acc.accuracy, row.accuracy);
      add_opt(acc.lr.gamma_mean, row.lr.gamma_mean);
      add_opt(acc.lr.gamma_max, row.lr.gamma_max);
      add_opt(acc.lr.alpha_mean, row.lr.alpha_mean);
      add_opt(acc.lr.alpha_max, row.lr.alpha_max);
      add_opt(acc.lr.ainv_mean, row.lr.ainv_mean);
      add_opt(acc.subopt, row.subopt);
    }
    mean.final_avg_loss += rec.final_avg_loss;
    mean.final_loss += rec.final_loss;
    add_opt(mean.final_accuracy, rec.final_accuracy);
    mean.wall_seconds += rec.wall_seconds;
  }
  for (RunRow& row : mean.rows) {
    row.loss /= n;
    div_opt(row.accuracy, n);
    div_opt(row.lr.gamma_mean, n);
    div_opt(row.lr.gamma_max, n);
    div_opt(row.lr.alpha_mean, n);
    div_opt(row.lr.alpha_max, n);
    div_opt(row.lr.ainv_mean, n);
    div_opt(row.subopt, n);
  }
  mean.final_avg_loss /= n;
  mean.final_loss /= n;
  div_opt(mean.final_accuracy, n);
  return mean;
}

}  // namespace

RunRecord run(const Problem& problem, const RunConfig& config, std::vector<StepTrace>* traces) {
  config.validate();
  std::vector<RunRecord> records;
  records.reserve(config.seeds);
  for (std::size_t r = 0; r < config.seeds; ++r) {
    records.push_back(run_single(problem, config, replicate_seed(config.seed, 0, r), r == 0 ? traces : nullptr));
  }
  return average_records(records);
}

std::vector<double> GridSpec::powers_of_two(int lo, int hi) {
  std::vector<double> values;
  for (int e = lo; e <= hi; ++e) values.push_back(std::ldexp(1.0, e));
  return values;
}

std::optional<double> last_window_accuracy(const RunRecord& record, std::size_t window) {
  if (record.rows.empty() || window == 0) return std::nullopt;
  const std::size_t count = std::min(window, record.rows.size());
  double sum = 0.0;
  for (std::size_t j = record.rows.size() - count; j < record.rows.size(); ++j) {
    if (!record.rows[j].accuracy) return std::nullopt;
    sum += *record.rows[j].accuracy;
  }
  return sum / static_cast<double>(count);
}

void set_grid_param(RunConfig& config, std::string_view param, double value) {
  OptimizerSpec& opt = config.optimizer;
  if (param == "lr") {
    if (is_gradagrad(opt.kind)) {
      opt.params.gamma0 = value;
    } else {
      opt.lr = value;
    }
  } else if (param == "gamma0") {
    opt.params.gamma0 = value;
  } else if (param == "rho") {
    opt.params.rho = value;
  } else if (param == "beta") {
    opt.params.beta = value;
  } else {
    throw std::invalid_argument("unknown grid parameter '" + std::string(param) + "'");
  }
}

GridResult grid(const Problem& problem, const RunConfig& base, const GridSpec& spec, std::size_t threads) {
  if (spec.values.empty()) throw std::invalid_argument("grid has no values");
  base.validate();

  std::vector<RunConfig> configs;
  for (double value : spec.values) {
    RunConfig config = base;
    set_grid_param(config, spec.param, value);
    configs.push_back(std::move(config));
  }

  const std::size_t n_points = configs.size();
  const std::size_t n_jobs = n_points * base.seeds;
  std::vector<RunRecord> results(n_jobs);
  std::vector<std::exception_ptr> errors(n_jobs);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t job = next++; job < n_jobs; job = next++) {
      const std::size_t point = job / base.seeds;
      const std::size_t replicate = job % base.seeds;
      try {
        results[job] = run_single(problem, configs[point], replicate_seed(base.seed, point, replicate));
      } catch (...) {
        errors[job] = std::current_exception();
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n_jobs);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }

  GridResult result;
  result.param = spec.param;
  for (std::size_t p = 0; p < n_points; ++p) {
    std::vector<RunRecord> replicates(results.begin() + static_cast<std::ptrdiff_t>(p * base.seeds),
                                      results.begin() + static_cast<std::ptrdiff_t>((p + 1) * base.seeds));
    GridPoint point;
    point.value = spec.values[p];
    point.record = average_records(replicates);
    result.points.push_back(std::move(point));
  }

  const bool by_accuracy = last_window_accuracy(result.points.front().record).has_value();
  result.metric = by_accuracy ? "accuracy_last10" : "final_loss";
  const double worst = std::numeric_limits<double>::infinity();
  // Scores are stored as-is; `key` maps them onto "smaller is better" with
  // diverged (non-finite) runs ranked last.
  auto key = [&](const GridPoint& point) {
    if (!std::isfinite(point.score)) return worst;
    return by_accuracy ? -point.score : point.score;
  };
  for (GridPoint& point : result.points) {
    point.score = by_accuracy ? *last_window_accuracy(point.record) : point.record.rows.back().loss;
  }
  for (std::size_t p = 1; p < n_points; ++p) {
    const GridPoint& cand = result.points[p];
    const GridPoint& best = result.points[result.winner];
    if (key(cand) < key(best) || (key(cand) == key(best) && cand.value < best.value)) result.winner = p;
  }
  return result;
}

namespace {

void put(std::ostream& out, const std::optional<double>& value) {
  if (value) out << format_double(*value);
}

}  // namespace

void write_run_record_csv(std::ostream& out, const RunRecord& record) {
  out << kRunRecordHeader << '\n';
  for (const RunRow& row : record.rows) {
    out << row.step << ',';
    put(out, row.epoch);
    out << ',' << format_double(row.loss) << ',';
    put(out, row.accuracy);
    out << ',';
    put(out, row.lr.gamma_mean);
    out << ',';
    put(out, row.lr.gamma_max);
    out << ',';
    put(out, row.lr.alpha_mean);
    out << ',';
    put(out, row.lr.alpha_max);
    out << ',';
    put(out, row.lr.ainv_mean);
    out << ',';
    put(out, row.subopt);
    out << '\n';
  }
}

void write_grid_csv(std::ostream& out, const GridResult& result) {
  out << kGridHeader << '\n';
  for (std::size_t p = 0; p < result.points.size(); ++p) {
    const GridPoint& point = result.points[p];
    out << result.param << ',' << format_double(point.value) << ',' << result.metric << ','
        << format_double(point.score) << ',' << format_double(point.record.final_loss) << ',';
    put(out, point.record.final_accuracy);
    out << ',' << (p == result.winner ? 1 : 0) << '\n';
  }
}

void write_run_summary(std::ostream& out, const RunConfig& config, const RunRecord& record) {
  out << "optimizer: " << to_string(config.optimizer.kind) << '\n'
      << "problem: " << config.problem.name << '\n'
      << "seeds: " << config.seeds << '\n'
      << "final loss: " << format_double(record.final_loss) << '\n'
      << "final averaged-iterate loss: " << format_double(record.final_avg_loss) << '\n';
  if (record.final_accuracy) out << "final accuracy: " << format_double(*record.final_accuracy) << '\n';
  out << "wall time (s): " << record.wall_seconds << '\n';
}

}  // namespace gradagrad
