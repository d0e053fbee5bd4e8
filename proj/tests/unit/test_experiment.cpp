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

#include <gtest/gtest.h>

#include <cmath>

#include "intent_assist/error.hpp"
#include "intent_assist/experiment.hpp"
#include "intent_assist/rng.hpp"

namespace intent_assist {
namespace {

using namespace eval;

ResultTable table_of(const std::string& method, std::initializer_list<double> percents) {
  ResultTable t;
  int i = 0;
  for (const double p : percents) {
    ResultRow r;
    r.method = method;
    r.condition = "c" + std::to_string(i++);
    r.success_rate = p / 100.0;
    t.rows.push_back(r);
  }
  return t;
}

TEST(StdDev, MatchesPublishedCrossOperatorSpread) {
  ResultTable raw = table_of("raw_replay", {38.43, 62.17, 82.54});
  assign_std_devs(raw);
  EXPECT_NEAR(raw.rows[0].std_dev, 22.08, 0.005);
  ResultTable ours = table_of("adaptor", {83.21, 89.85, 94.53});
  assign_std_devs(ours);
  EXPECT_NEAR(ours.rows[2].std_dev, 5.69, 0.005);
}

TEST(StdDev, GroupsByMethodAndSkipsFailedRows) {
  ResultTable t = table_of("a", {10, 30});
  ResultTable u = table_of("b", {50, 50, 50});
  t.rows.insert(t.rows.end(), u.rows.begin(), u.rows.end());
  t.rows.push_back(t.rows[0]);
  t.rows.back().failed = true;
  t.rows.back().success_rate = 0.99;
  assign_std_devs(t);
  EXPECT_NEAR(t.rows[0].std_dev, std::sqrt(200.0), 1e-12);
  EXPECT_EQ(t.rows[2].std_dev, 0.0);
}

TEST(Summarize, RateIsExactRatio) {
  std::vector<EpisodeRecord> eps(7);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    eps[i].success = i % 3 == 0;
    eps[i].operator_steps = i;
    eps[i].keyframe_count = 2 * i;
  }
  const ResultRow r = summarize("m", "c", 0.5, eps);
  EXPECT_EQ(r.rollouts, 7u);
  EXPECT_EQ(r.successes, 3u);
  EXPECT_EQ(r.success_rate, 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(r.mean_operator_steps, 3.0);
  EXPECT_DOUBLE_EQ(r.mean_keyframes, 6.0);
}

TEST(Observe, WidthsAndRange) {
  const sim::Task task = sim::make_task("organize2");
  const policy::Observation obs = observe(sim::reset(task, 1), task.task_id);
  EXPECT_EQ(static_cast<std::size_t>(obs.proprio.size()), proprio_dim());
  EXPECT_EQ(static_cast<std::size_t>(obs.scene.size()), scene_dim(task));
  EXPECT_LE(obs.scene.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_LE(obs.proprio.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Preprocess, ZeroSigmaKeepsSourcePoints) {
  const sim::Task task = sim::make_task("transfer");
  const auto demos = expert_demos(task, 3, 1);
  PipelineConfig cfg;
  cfg.sigma = 0.0;
  cfg.truncate_min_frac = 1.0;
  cfg.perturbations_per_demo = 2;
  const PreprocessResult r = preprocess_demos(demos, cfg, 9);
  ASSERT_EQ(r.records.size(), 6u);
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    EXPECT_EQ(r.records[i].points(), demos[i / 2].points());
    for (const char* key : {"source_id", "layout_seed", "sigma", "noise_scale", "seed", "truncated_len",
                            "clamped", "eta", "keyframes", "achieved_error"}) {
      EXPECT_TRUE(r.records[i].meta().count(key)) << key;
    }
  }
}

TEST(Preprocess, DeterministicAndBounded) {
  const sim::Task task = sim::make_task("transfer");
  const auto demos = expert_demos(task, 4, 2);
  PipelineConfig cfg;
  cfg.sigma = 0.2;
  const PreprocessResult a = preprocess_demos(demos, cfg, 3);
  const PreprocessResult b = preprocess_demos(demos, cfg, 3);
  EXPECT_EQ(summary_csv(a.summary), summary_csv(b.summary));
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].points(), b.records[i].points());
    EXPECT_LE(a.summary[i].noise_scale, cfg.sigma);
    EXPECT_LE(a.summary[i].achieved_error, cfg.eta + keyframe::kBudgetTolerance);
    for (const auto& p : a.records[i].points()) {
      EXPECT_GE(p.head(2).minCoeff(), 0.0);
      EXPECT_LE(p.head(2).maxCoeff(), 1.0);
    }
  }
}

TEST(Samples, OnePerExpertStep) {
  const sim::Task task = sim::make_task("transfer");
  PipelineConfig cfg;
  cfg.perturbations_per_demo = 2;
  const auto demos = expert_demos(task, 3, 4);
  const PreprocessResult pre = preprocess_demos(demos, cfg, 1);
  const policy::ModelSpec spec = make_model_spec(task, cfg);
  const auto samples = samples_from_records(pre.records, spec);
  std::size_t expected = 0;
  for (const auto& d : demos) expected += 2 * (d.size() - 1);
  ASSERT_EQ(samples.size(), expected);
  for (const auto& s : samples) {
    EXPECT_EQ(static_cast<std::size_t>(s.context.size()), spec.context_dim());
    EXPECT_EQ(static_cast<std::size_t>(s.target.size()), spec.chunk_dim());
    EXPECT_LE(s.target.cwiseAbs().maxCoeff(), 1.0 + 1e-12);
  }
}

TEST(Rollout, ExpertControllerSucceeds) {
  const sim::Task task = sim::make_task("organize2");
  const ExpertController expert(task, 8);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Rollout r = rollout(expert, task, sim::reset(task, seed), step_cap_for(task, seed), seed);
    EXPECT_TRUE(r.success);
    EXPECT_FALSE(r.capped);
    EXPECT_EQ(r.actions.size(), sim::run_expert(task, seed).actions.size());
  }
}

TEST(Decomposition, ExpertPolicyHasNoLossOrShift) {
  const sim::Task task = sim::make_task("transfer");
  const ControllerFactory expert = [&task](const sim::WorldState&, std::uint64_t) {
    return std::make_unique<ExpertController>(task, 8);
  };
  const policy::BoxNormalizer bounds = make_model_spec(task, PipelineConfig{}).action_bounds;
  const LossDecomposition d = estimate_loss_decomposition(expert, task, bounds, 10, 5);
  EXPECT_LT(d.supervised, 1e-10);
  EXPECT_LT(std::abs(d.shift), 1e-10);
  EXPECT_EQ(d.capped_rollouts, 0u);
  EXPECT_THROW(estimate_loss_decomposition(expert, task, bounds, 0, 5), ContractViolation);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c;
  c.sigma_grid = {0.0, 0.05};
  c.eta_grid = {0.01, 0.1};
  c.rollouts = 7;
  c.pipeline.training.hidden = {32};
  c.pipeline.training.optimizer = "sgd";
  const ExperimentConfig back = parse_experiment_config(experiment_config_to_json(c));
  EXPECT_EQ(experiment_config_to_json(back), experiment_config_to_json(c));
  EXPECT_EQ(back.pipeline.training.hidden, (std::vector<std::size_t>{32}));
}

TEST(Config, ValidationRejectsBadGrids) {
  EXPECT_THROW(parse_experiment_config(R"({"sigma_grid": []})"), ContractViolation);
  EXPECT_THROW(parse_experiment_config(R"({"rollouts": 0})"), ContractViolation);
  EXPECT_THROW(parse_experiment_config(R"({"eta_grid": [0.0]})"), ContractViolation);
  EXPECT_THROW(parse_experiment_config(R"({"rollouts": "many"})"), FormatError);
  EXPECT_THROW(parse_experiment_config("{"), FormatError);
}

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.pipeline.n_demos = 4;
  c.pipeline.perturbations_per_demo = 1;
  c.pipeline.training.epochs = 2;
  c.pipeline.training.hidden = {16};
  c.sigma_grid = {0.0, 0.05};
  c.eta_grid = {0.02, 0.2};
  c.rollouts = 3;
  c.cross_rollouts = 3;
  return c;
}

TEST(Experiments, TinyRunsAreReproducible) {
  const ExperimentConfig c = tiny_config();
  const ExperimentOutput a = run_noise_ablation(c);
  const ExperimentOutput b = run_noise_ablation(c);
  EXPECT_EQ(a.table.to_csv(), b.table.to_csv());
  ASSERT_EQ(a.table.rows.size(), 2u);
  ASSERT_EQ(a.episodes.size(), 6u);
  for (const ResultRow& r : a.table.rows) {
    EXPECT_EQ(r.rollouts, 3u);
    EXPECT_GE(r.success_rate, 0.0);
    EXPECT_LE(r.success_rate, 1.0);
  }
}

TEST(Experiments, CrossOperatorHasRowPerProfileAndMethod) {
  const ExperimentOutput out = run_cross_operator(tiny_config());
  EXPECT_EQ(out.table.rows.size(), 6u);
  for (const char* label : {"novice", "intermediate", "expert"}) {
    EXPECT_NE(out.table.find("raw_replay", label), nullptr);
    EXPECT_NE(out.table.find("adaptor", label), nullptr);
  }
  ExperimentConfig missing = tiny_config();
  missing.profiles = {"novice"};
  EXPECT_THROW(run_cross_operator(missing), ContractViolation);
}

TEST(Experiments, BudgetRowsReportKeyframes) {
  const ExperimentOutput out = run_budget_ablation(tiny_config());
  ASSERT_EQ(out.table.rows.size(), 2u);
  EXPECT_GE(out.table.rows[0].mean_keyframes, out.table.rows[1].mean_keyframes);
  EXPECT_GE(out.table.rows[1].mean_keyframes, 2.0);
}

}  // namespace
}  // namespace intent_assist
