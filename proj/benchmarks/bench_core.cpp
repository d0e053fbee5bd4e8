// Copyright 2026 The intent-assist Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "intent_assist/experiment.hpp"
#include "intent_assist/keyframe.hpp"
#include "intent_assist/policy.hpp"
#include "intent_assist/rng.hpp"

namespace ia = intent_assist;

namespace {

ia::traj::Trajectory walk(std::size_t n, std::uint64_t seed) {
  ia::Rng rng(seed);
  std::vector<ia::traj::Point> pts;
  Eigen::Vector3d x(0.5, 0.5, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    x.head<2>() += Eigen::Vector2d(rng.normal(0, 0.02), rng.normal(0, 0.02));
    pts.emplace_back(x);
  }
  return ia::traj::Trajectory::with_uniform_time(std::move(pts), 0.1);
}

void BM_DirectedHausdorff(benchmark::State& state) {
  const auto raw = walk(static_cast<std::size_t>(state.range(0)), 1);
  const auto poly = walk(16, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ia::traj::directed_hausdorff(raw, poly));
}
BENCHMARK(BM_DirectedHausdorff)->Arg(64)->Arg(512);

void BM_ExtractKeyframes(benchmark::State& state) {
  const auto raw = walk(static_cast<std::size_t>(state.range(0)), 3);
  const ia::keyframe::ErrorBudget eta(0.05);
  for (auto _ : state) benchmark::DoNotOptimize(ia::keyframe::extract_keyframes(raw, eta));
}
BENCHMARK(BM_ExtractKeyframes)->Arg(50)->Arg(200);

void BM_CfmStep(benchmark::State& state) {
  const std::size_t width = static_cast<std::size_t>(state.range(0));
  ia::policy::VectorFieldNet net(24, 79, {width, width, width}, 0);
  ia::Rng rng(4);
  std::vector<ia::policy::TrainingSample> batch(64);
  for (auto& s : batch) {
    s.context = Eigen::VectorXd::NullaryExpr(79, [&] { return rng.uniform(-1, 1); });
    s.target = Eigen::VectorXd::NullaryExpr(24, [&] { return rng.uniform(-1, 1); });
  }
  for (auto _ : state) benchmark::DoNotOptimize(ia::policy::cfm_loss_and_grad(net, batch, 7));
}
BENCHMARK(BM_CfmStep)->Arg(64)->Arg(128);

void BM_InferChunk(benchmark::State& state) {
  ia::policy::VectorFieldNet net(24, 79, {128, 128, 128}, 0);
  const Eigen::VectorXd ctx = Eigen::VectorXd::Constant(79, 0.1);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ia::policy::infer_chunk(net, ctx, 10, seed++));
}
BENCHMARK(BM_InferChunk);

void BM_OperatorDemoKeyframes(benchmark::State& state) {
  const ia::sim::Task task = ia::sim::make_task("transfer");
  const ia::sim::OperatorProfile novice = ia::sim::make_profile("novice");
  const ia::policy::IntentEncoder encoder = ia::eval::make_model_spec(task, {}).intent;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto demo = ia::sim::operator_demo(task, novice, seed++);
    benchmark::DoNotOptimize(ia::eval::infer_intent(demo, 0.05, encoder));
  }
}
BENCHMARK(BM_OperatorDemoKeyframes);

}  // namespace

BENCHMARK_MAIN();
