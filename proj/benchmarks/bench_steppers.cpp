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

#include <benchmark/benchmark.h>

#include <random>

#include "gradagrad/baselines.hpp"
#include "gradagrad/harness.hpp"
#include "gradagrad/optim.hpp"

namespace {

using namespace gradagrad;

std::vector<Vector> gradients(std::size_t dim, std::size_t count) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.3, 1.0);
  std::vector<Vector> out(count, Vector(dim));
  for (Vector& g : out) {
    for (double& v : g) v = n(rng);
  }
  return out;
}

void BM_StepDiagonal(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto grads = gradients(dim, 64);
  HyperParams params;
  params.beta = 0.9;
  OptimizerState s = init_diagonal(Vector(dim, 0.0), 1.0);
  std::size_t j = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(step_diagonal(s, grads[j++ % grads.size()], params, Domain::unconstrained()));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(dim));
}
BENCHMARK(BM_StepDiagonal)->RangeMultiplier(8)->Range(8, 1 << 15);

void BM_StepScalar(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto grads = gradients(dim, 64);
  const HyperParams params = HyperParams::scalar_defaults();
  OptimizerState s = init_scalar(Vector(dim, 0.0), 1.0);
  std::size_t j = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(step_scalar(s, grads[j++ % grads.size()], params));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(dim));
}
BENCHMARK(BM_StepScalar)->RangeMultiplier(8)->Range(8, 1 << 15);

void BM_StepAdagrad(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto grads = gradients(dim, 64);
  OptimizerState s = init_diagonal(Vector(dim, 0.0), 1.0);
  std::size_t j = 0;
  for (auto _ : state) {
    step_adagrad(s, grads[j++ % grads.size()], 1.0);
    benchmark::DoNotOptimize(s.x.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(dim));
}
BENCHMARK(BM_StepAdagrad)->RangeMultiplier(8)->Range(8, 1 << 15);

void BM_LogisticEpoch(benchmark::State& state) {
  RunConfig config;
  config.problem.name = "logistic";
  config.problem.dataset_path = GRADAGRAD_FIXTURES "/breast_cancer_scale.libsvm";
  config.problem.batch_size = static_cast<std::size_t>(state.range(0));
  config.epochs = 1;
  const auto problem = build_problem(config.problem);
  for (auto _ : state) benchmark::DoNotOptimize(run(*problem, config).final_loss);
}
BENCHMARK(BM_LogisticEpoch)->Arg(1)->Arg(32)->Arg(569);

}  // namespace

BENCHMARK_MAIN();
