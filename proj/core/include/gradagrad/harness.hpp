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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gradagrad/baselines.hpp"
#include "gradagrad/data.hpp"
#include "gradagrad/optim.hpp"
#include "gradagrad/problems.hpp"

namespace gradagrad {

enum class OptimizerKind { gradagrad, gradagrad_scalar, adagrad, sgd, adam };

std::string_view to_string(OptimizerKind kind);
std::optional<OptimizerKind> parse_optimizer(std::string_view text);

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::gradagrad;
  /// Used by both GradaGrad variants.
  HyperParams params;
  /// AdaGrad's γ, or the SGD / Adam learning rate.
  double lr = 1.0;
  AdamParams adam;
};

/// Learning-rate statistics across coordinates; fields that do not apply to
/// the optimizer stay empty.
struct LrStats {
  std::optional<double> gamma_mean;
  std::optional<double> gamma_max;
  std::optional<double> alpha_mean;
  std::optional<double> alpha_max;
  std::optional<double> ainv_mean;
};

/// Uniform single-step front end over every stepper.
class Optimizer {
 public:
  Optimizer(OptimizerSpec spec, Vector x0, Domain domain = Domain::unconstrained());

  /// Advances one step. The trace is populated for the GradaGrad variants
  /// and empty for the baselines.
  StepTrace step(std::span<const double> g);

  const OptimizerSpec& spec() const { return spec_; }
  const OptimizerState& state() const { return state_; }
  const Vector& x() const { return state_.x; }
  LrStats lr_stats() const;

 private:
  OptimizerSpec spec_;
  Domain domain_;
  OptimizerState state_;
  AdamMoments moments_;
};

struct ProblemSpec {
  std::string name = "quadratic";  // abs | quadratic | logistic | constant
  std::size_t dim = 1;             // abs, constant; quadratic when diag is empty
  Vector diag;                     // quadratic
  double noise_std = 0.0;          // quadratic
  std::string dataset_path;        // logistic
  LabelRule labels;                // logistic
  std::size_t batch_size = 1;      // logistic
};

/// Throws std::invalid_argument for unknown names or bad parameters and
/// ParseError / std::runtime_error for unreadable datasets.
std::shared_ptr<const Problem> build_problem(const ProblemSpec& spec);

struct RunConfig {
  ProblemSpec problem;
  OptimizerSpec optimizer;
  /// Exactly one of steps / epochs.
  std::optional<std::size_t> steps;
  std::optional<std::size_t> epochs;
  std::uint64_t seed = 0;
  /// Seed replicates averaged into one record.
  std::size_t seeds = 1;
  Domain domain = Domain::unconstrained();
  /// Every coordinate of x₀.
  double x0 = 0.0;
  /// Evaluation interval in steps; default one epoch, or 100 steps for
  /// synthetic problems.
  std::optional<std::size_t> eval_every;
  bool trace = false;

  void validate() const;
};

struct RunRow {
  std::size_t step = 0;
  std::optional<double> epoch;
  double loss = 0.0;
  std::optional<double> accuracy;
  LrStats lr;
  std::optional<double> subopt;
};

struct RunRecord {
  std::vector<RunRow> rows;
  double final_avg_loss = 0.0;
  double final_loss = 0.0;
  std::optional<double> final_accuracy;
  double wall_seconds = 0.0;
};

/// Total steps implied by the config for this problem.
std::size_t total_steps(const RunConfig& config, const Problem& problem);

/// One replicate with the given sample-stream seed. Appends every step's
/// trace to `traces` when it is non-null.
RunRecord run_single(const Problem& problem, const RunConfig& config, std::uint64_t stream_seed,
                     std::vector<StepTrace>* traces = nullptr);

/// Replicate r uses derive_seed(config.seed, stream, r).
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t stream, std::size_t replicate);

/// Runs config.seeds replicates and averages them row by row. Traces come
/// from replicate 0 only.
RunRecord run(const Problem& problem, const RunConfig& config, std::vector<StepTrace>* traces = nullptr);

struct GridSpec {
  /// lr | gamma0 | rho | beta
  std::string param = "lr";
  std::vector<double> values;

  /// 2^lo … 2^hi.
  static std::vector<double> powers_of_two(int lo, int hi);
};

struct GridPoint {
  double value = 0.0;
  RunRecord record;  // averaged over seeds
  double score = 0.0;
};

struct GridResult {
  std::string param;
  /// "accuracy_last10" (higher wins) or "final_loss" (lower wins).
  std::string metric;
  std::vector<GridPoint> points;  // in grid order
  std::size_t winner = 0;
};

/// Mean accuracy over the last `window` evaluations, when accuracy exists.
std::optional<double> last_window_accuracy(const RunRecord& record, std::size_t window = 10);

/// Applies `value` to the named parameter. Throws std::invalid_argument for
/// unknown names.
void set_grid_param(RunConfig& config, std::string_view param, double value);

/// Every grid point × seed replicate, run on up to `threads` worker
/// threads (0 = hardware concurrency). Ties on the score go to the smaller
/// parameter value.
GridResult grid(const Problem& problem, const RunConfig& base, const GridSpec& spec, std::size_t threads = 0);

// CSV output

inline constexpr std::string_view kRunRecordHeader =
    "step,epoch,loss,accuracy,gamma_mean,gamma_max,alpha_mean,alpha_max,ainv_mean,subopt";
inline constexpr std::string_view kGridHeader = "param,value,metric,score,final_loss,final_accuracy,winner";

void write_run_record_csv(std::ostream& out, const RunRecord& record);
void write_grid_csv(std::ostream& out, const GridResult& result);
/// Plain-text summary lines (not part of any CSV).
void write_run_summary(std::ostream& out, const RunConfig& config, const RunRecord& record);

}  // namespace gradagrad
