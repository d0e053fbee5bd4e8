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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "intent_assist/keyframe.hpp"
#include "intent_assist/policy.hpp"
#include "intent_assist/simenv.hpp"
#include "intent_assist/trajectory.hpp"

namespace intent_assist::eval {

// ---------------------------------------------------------------------------
// Observation and intent plumbing

// proprio: agent (x, y) in [-1, 1], gripper closed +-1, holding +-1.
// scene: per object (x, y, held +-1), then per target (x, y).
policy::Observation observe(const sim::WorldState& state, const std::string& task_id);
std::size_t proprio_dim();
std::size_t scene_dim(const sim::Task& task);

// Keyframe metric weights and perturbation mask over (x, y, gripper).
std::vector<double> keyframe_weights();
std::vector<double> perturbation_mask();

struct PipelineConfig {
  std::string task_id = "transfer";
  double sigma = 0.0;               // perturbation scale of the Gaussian tube
  bool ramp_schedule = false;       // sigma grows linearly along the demo
  double eta = 0.05;                // keyframe error budget
  double truncate_min_frac = 0.6;   // 1.0 disables temporal truncation
  std::size_t n_demos = 96;
  std::size_t perturbations_per_demo = 4;
  std::size_t slots = 16;
  std::size_t horizon = 8;
  std::size_t flow_steps = 10;
  std::uint64_t data_seed = 1;
  policy::TrainConfig training;
};

policy::ModelSpec make_model_spec(const sim::Task& task, const PipelineConfig& config);

// Keyframes of `demo` at budget eta, encoded for the model.
struct IntentResult {
  policy::IntentEmbedding embedding;
  keyframe::KeyframeSet keyframes;
};
IntentResult infer_intent(const traj::Trajectory& demo, double eta,
                          const policy::IntentEncoder& encoder);

// ---------------------------------------------------------------------------
// Dataset construction (perturb -> clamp -> truncate -> extract)

struct PreprocessSummaryRow {
  std::string source_id;
  std::size_t sample = 0;
  std::uint64_t seed = 0;
  double noise_scale = 0.0;
  std::size_t truncated_len = 0;
  std::size_t keyframe_count = 0;
  double achieved_error = 0.0;
  std::size_t clamped = 0;
};

struct PreprocessResult {
  std::vector<traj::Trajectory> records;  // meta carries keyframe indices
  std::vector<PreprocessSummaryRow> summary;
};

// Each clean demo yields `perturbations_per_demo` records. Record m of demo i
// uses seed derive_seed(seed, i * M + m) and a noise scale drawn uniformly in
// [0, sigma]. Meta fields: source_id, layout_seed, sigma, noise_scale, seed,
// truncated_len, clamped, eta, keyframes, achieved_error.
PreprocessResult preprocess_demos(std::span<const traj::Trajectory> demos,
                                  const PipelineConfig& config, std::uint64_t seed);

std::string summary_csv(std::span<const PreprocessSummaryRow> rows);

// Pairs each record's intent with the scripted expert's states and action
// chunks on the record's layout (regenerated from meta layout_seed).
std::vector<policy::TrainingSample> samples_from_records(
    std::span<const traj::Trajectory> records, const policy::ModelSpec& spec);

std::vector<traj::Trajectory> expert_demos(const sim::Task& task, std::size_t count,
                                           std::uint64_t seed);

struct TrainedPolicy {
  policy::PolicyModel model;
  std::vector<double> loss_history;
  std::optional<std::string> fault;
  std::vector<std::size_t> keyframe_counts;
};

// Full training pipeline: expert demos -> preprocess -> samples -> train.
TrainedPolicy train_pipeline(const PipelineConfig& config);

// Memoizes train_pipeline by the full pipeline configuration. Training is
// deterministic, so a hit returns exactly what a fresh run would.
class TrainingCache {
 public:
  std::shared_ptr<const TrainedPolicy> get(const PipelineConfig& config);
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::shared_ptr<const TrainedPolicy>> entries_;
};

std::string pipeline_config_key(const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Controllers and rollouts

class Controller {
 public:
  virtual ~Controller() = default;
  virtual policy::ActionChunk act(const sim::WorldState& state, std::uint64_t seed) const = 0;
};

class PolicyController final : public Controller {
 public:
  PolicyController(const policy::PolicyModel& model, std::string task_id,
                   policy::IntentEmbedding intent);
  policy::ActionChunk act(const sim::WorldState& state, std::uint64_t seed) const override;

 private:
  const policy::PolicyModel& model_;
  std::string task_id_;
  policy::IntentEmbedding intent_;
};

// Scripted expert, simulated forward `horizon` steps per query.
class ExpertController final : public Controller {
 public:
  ExpertController(sim::Task task, std::size_t horizon);
  policy::ActionChunk act(const sim::WorldState& state, std::uint64_t seed) const override;

 private:
  sim::Task task_;
  std::size_t horizon_;
};

sim::Action to_action(const policy::ActionChunk& chunk, std::size_t row);

struct Rollout {
  std::vector<sim::WorldState> states;
  std::vector<sim::Action> actions;
  bool success = false;
  bool capped = false;  // stopped by the step cap
};

// Executes whole chunks open-loop, re-querying between chunks, until
// success or `step_cap` steps.
Rollout rollout(const Controller& controller, const sim::Task& task,
                sim::WorldState initial, std::size_t step_cap, std::uint64_t seed);

// 4x the scripted expert's demo length on this layout.
std::size_t step_cap_for(const sim::Task& task, std::uint64_t layout_seed);

// ---------------------------------------------------------------------------
// Episodes and tables

struct EpisodeRecord {
  std::string task_id;
  std::uint64_t seed = 0;
  std::string profile;
  std::string method;     // "adaptor" or "raw_replay"
  std::string condition;  // table row this episode belongs to
  std::size_t operator_steps = 0;
  std::size_t rollout_steps = 0;
  bool success = false;
  std::size_t keyframe_count = 0;
  double sigma = 0.0;
  double eta = 0.0;

  std::string to_json_line() const;
};

// Operator demo -> optional truncation to `intent_fraction` of its length ->
// keyframes at eta -> policy rollout from the same initial layout.
EpisodeRecord run_adaptor_episode(const policy::PolicyModel& model, const sim::Task& task,
                                  const sim::OperatorProfile& profile, std::uint64_t seed,
                                  double eta, double intent_fraction = 1.0);

EpisodeRecord run_raw_replay_episode(const sim::Task& task,
                                     const sim::OperatorProfile& profile, std::uint64_t seed);

struct ResultRow {
  std::string method;
  std::string condition;
  double parameter = 0.0;
  std::size_t rollouts = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double mean_operator_steps = 0.0;
  double mean_keyframes = 0.0;
  double std_dev = 0.0;  // SD of success rate across this method's rows
  bool failed = false;
  std::string note;
};

struct ResultTable {
  std::string name;
  std::vector<ResultRow> rows;

  const ResultRow* find(const std::string& method, const std::string& condition) const;
  std::string to_csv() const;
  std::string summary() const;
};

// Builds a row from episode records; success_rate == successes / rollouts.
ResultRow summarize(const std::string& method, const std::string& condition,
                    double parameter, std::span<const EpisodeRecord> episodes);

// Fills each row's std_dev with the sample SD (n - 1) of success rate (in
// percent) across rows sharing its method.
void assign_std_devs(ResultTable& table);

struct ExperimentConfig {
  PipelineConfig pipeline;  // task, K, H, training, and the fixed sigma/eta
  std::vector<double> sigma_grid{0.0, 0.03, 0.2};
  std::vector<double> eta_grid{0.005, 0.02, 0.05, 0.15, 0.6};
  std::vector<std::string> profiles{"novice", "intermediate", "expert"};
  std::string eval_profile = "novice";
  std::size_t rollouts = 200;
  std::size_t cross_rollouts = 300;
  std::size_t decomposition_episodes = 50;
  std::uint64_t eval_seed = 1000;
  std::filesystem::path output_dir = "results";

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string experiment_config_to_json(const ExperimentConfig& config);

struct ExperimentOutput {
  ResultTable table;
  std::vector<EpisodeRecord> episodes;
};

ExperimentOutput run_noise_ablation(const ExperimentConfig& config,
                                    TrainingCache* cache = nullptr);
ExperimentOutput run_budget_ablation(const ExperimentConfig& config,
                                    TrainingCache* cache = nullptr);
ExperimentOutput run_cross_operator(const ExperimentConfig& config,
                                    TrainingCache* cache = nullptr);

// Writes <dir>/<name>.csv, <name>_summary.txt and <name>_episodes.jsonl.
void write_experiment_output(const std::filesystem::path& dir, const ExperimentOutput& out);

// ---------------------------------------------------------------------------
// Supervised / covariate-shift decomposition of the imitation loss

struct LossDecomposition {
  double supervised = 0.0;      // mean J along expert trajectories
  double on_policy = 0.0;       // mean J along policy rollouts
  double shift = 0.0;           // on_policy - supervised
  double supervised_se = 0.0;   // standard errors over episodes
  double on_policy_se = 0.0;
  std::size_t episodes = 0;
  std::size_t capped_rollouts = 0;
};

// Builds the controller for one episode given its initial state and seed.
using ControllerFactory =
    std::function<std::unique_ptr<Controller>(const sim::WorldState& initial, std::uint64_t seed)>;

// J is the per-step squared Euclidean action discrepancy against the
// scripted expert queried at each visited state, with both actions mapped
// through `action_bounds` onto [-1, 1] per coordinate.
LossDecomposition estimate_loss_decomposition(const ControllerFactory& policy,
                                              const sim::Task& task,
                                              const policy::BoxNormalizer& action_bounds,
                                              std::size_t n, std::uint64_t seed);

std::string decomposition_csv(const LossDecomposition& d);

// Controller factory that conditions `model` on the scripted expert's demo.
ControllerFactory policy_factory(const policy::PolicyModel& model, const sim::Task& task,
                                 double eta);

}  // namespace intent_assist::eval
