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

#include "intent_assist/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "intent_assist/error.hpp"
#include "intent_assist/perturb.hpp"
#include "intent_assist/rng.hpp"
#include "json.hpp"

namespace intent_assist::eval {

using nlohmann::json;

namespace {

double to_unit(double v, double lo, double hi) { return 2.0 * (v - lo) / (hi - lo) - 1.0; }

double sign_flag(bool b) { return b ? 1.0 : -1.0; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string join_indices(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::size_t> parse_indices(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stoull(item));
  return out;
}

const std::string& meta_at(const traj::Trajectory& t, const std::string& key) {
  const auto it = t.meta().find(key);
  if (it == t.meta().end()) {
    throw ContractViolation("trajectory record is missing meta field '" + key + "'");
  }
  return it->second;
}

double sq_action_error(const sim::Action& a, const sim::Action& b,
                       const policy::BoxNormalizer& bounds) {
  const auto vec = [](const sim::Action& x) { return Eigen::Vector3d(x.displacement.x(), x.displacement.y(), x.grasp); };
  return (bounds.normalize(vec(a)) - bounds.normalize(vec(b))).squaredNorm();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

// ---------------------------------------------------------------------------
// Observation and intent plumbing

policy::Observation observe(const sim::WorldState& state, const std::string& task_id) {
  const sim::Box& b = state.bounds;
  policy::Observation obs;
  obs.task_id = task_id;
  obs.proprio.resize(static_cast<Eigen::Index>(proprio_dim()));
  obs.proprio << to_unit(state.agent.x(), b.lo.x(), b.hi.x()),
      to_unit(state.agent.y(), b.lo.y(), b.hi.y()), sign_flag(state.grasp),
      sign_flag(state.held_object().has_value());
  obs.scene.resize(static_cast<Eigen::Index>(3 * state.objects.size() + 2 * state.targets.size()));
  Eigen::Index at = 0;
  for (const sim::ObjectState& o : state.objects) {
    obs.scene[at++] = to_unit(o.position.x(), b.lo.x(), b.hi.x());
    obs.scene[at++] = to_unit(o.position.y(), b.lo.y(), b.hi.y());
    obs.scene[at++] = sign_flag(o.held);
  }
  for (const sim::TargetZone& t : state.targets) {
    obs.scene[at++] = to_unit(t.position.x(), b.lo.x(), b.hi.x());
    obs.scene[at++] = to_unit(t.position.y(), b.lo.y(), b.hi.y());
  }
  return obs;
}

std::size_t proprio_dim() { return 4; }

std::size_t scene_dim(const sim::Task& task) {
  return 3 * task.object_regions.size() + 2 * task.target_regions.size();
}

std::vector<double> keyframe_weights() { return {1.0, 1.0, 1.0}; }
std::vector<double> perturbation_mask() { return {1.0, 1.0, 0.0}; }

policy::ModelSpec make_model_spec(const sim::Task& task, const PipelineConfig& config) {
  policy::ModelSpec spec;
  spec.task_ids = {task.task_id};
  spec.proprio_dim = proprio_dim();
  spec.scene_dim = scene_dim(task);
  spec.horizon = config.horizon;
  spec.flow_steps = config.flow_steps;
  spec.intent.slots = config.slots;
  spec.intent.bounds.lo = Eigen::Vector3d(task.bounds.lo.x(), task.bounds.lo.y(), 0.0);
  spec.intent.bounds.hi = Eigen::Vector3d(task.bounds.hi.x(), task.bounds.hi.y(), 1.0);
  spec.action_bounds.lo = Eigen::Vector3d(-task.max_step, -task.max_step, 0.0);
  spec.action_bounds.hi = Eigen::Vector3d(task.max_step, task.max_step, 1.0);
  spec.training = config.training;
  return spec;
}

IntentResult infer_intent(const traj::Trajectory& demo, double eta,
                          const policy::IntentEncoder& encoder) {
  const std::vector<double> w = keyframe_weights();
  IntentResult r;
  r.keyframes = keyframe::extract_keyframes(demo, keyframe::ErrorBudget(eta), w);
  r.embedding = policy::encode_intent(r.keyframes, demo, encoder);
  return r;
}

// ---------------------------------------------------------------------------
// Dataset construction

std::vector<traj::Trajectory> expert_demos(const sim::Task& task, std::size_t count,
                                           std::uint64_t seed) {
  std::vector<traj::Trajectory> demos;
  demos.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    demos.push_back(sim::expert_demo(task, derive_seed(seed, i)));
  }
  return demos;
}

PreprocessResult preprocess_demos(std::span<const traj::Trajectory> demos,
                                  const PipelineConfig& config, std::uint64_t seed) {
  if (config.perturbations_per_demo == 0) {
    throw ContractViolation("perturbations_per_demo must be >= 1");
  }
  const keyframe::ErrorBudget budget(config.eta);
  const std::vector<double> mask = perturbation_mask();
  const std::vector<double> weights = keyframe_weights();
  PreprocessResult out;
  const std::size_t m_count = config.perturbations_per_demo;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    const traj::Trajectory& demo = demos[i];
    if (demo.dim() != sim::kPointDim) {
      throw ContractViolation("demo " + std::to_string(i) + " has dimension " +
                              std::to_string(demo.dim()) + ", expected 3");
    }
    const sim::Task task = sim::make_task(demo.task_id());
    const std::string source_id = demo.meta().count("source_id")
                                      ? demo.meta().at("source_id")
                                      : demo.task_id() + "#" + std::to_string(i);
    for (std::size_t m = 0; m < m_count; ++m) {
      const std::uint64_t sample_seed = derive_seed(seed, i * m_count + m);
      Rng rng(derive_seed(sample_seed, "scale"));
      const double scale = config.sigma * rng.uniform();
      const perturb::PerturbationKernel kernel =
          config.ramp_schedule ? perturb::build_ramp_kernel(demo.size(), demo.dim(), scale, mask)
                               : perturb::build_kernel(demo.size(), demo.dim(), scale, mask);
      const perturb::PerturbedSample sample = perturb::sample_perturbed(demo, kernel, sample_seed);
      const double lo[2] = {task.bounds.lo.x(), task.bounds.lo.y()};
      const double hi[2] = {task.bounds.hi.x(), task.bounds.hi.y()};
      const perturb::ClampResult clamped = perturb::clamp_to_box(sample.trajectory, lo, hi);
      const traj::Trajectory cropped =
          config.truncate_min_frac < 1.0
              ? perturb::truncate_random(clamped.trajectory, config.truncate_min_frac,
                                         derive_seed(sample_seed, "truncate"))
              : clamped.trajectory;
      const keyframe::KeyframeSet ks = keyframe::extract_keyframes(cropped, budget, weights);

      traj::Meta meta = demo.meta();
      meta["source_id"] = source_id;
      meta["sigma"] = fmt_short(config.sigma);
      meta["noise_scale"] = fmt(scale);
      meta["seed"] = std::to_string(sample_seed);
      meta["truncated_len"] = std::to_string(cropped.size());
      meta["clamped"] = std::to_string(clamped.clamped_coordinates);
      meta["eta"] = fmt_short(config.eta);
      meta["keyframes"] = join_indices(ks.indices);
      meta["achieved_error"] = fmt(ks.achieved_error);
      out.records.emplace_back(cropped.points(), cropped.timestamps(), demo.task_id(),
                               std::move(meta));
      out.summary.push_back({source_id, m, sample_seed, scale, cropped.size(), ks.size(),
                             ks.achieved_error, clamped.clamped_coordinates});
    }
  }
  return out;
}

std::string summary_csv(std::span<const PreprocessSummaryRow> rows) {
  std::string out =
      "source_id,sample,seed,noise_scale,truncated_len,keyframe_count,achieved_error,clamped\n";
  for (const PreprocessSummaryRow& r : rows) {
    out += r.source_id + ',' + std::to_string(r.sample) + ',' + std::to_string(r.seed) + ',' +
           fmt(r.noise_scale) + ',' + std::to_string(r.truncated_len) + ',' +
           std::to_string(r.keyframe_count) + ',' + fmt(r.achieved_error) + ',' +
           std::to_string(r.clamped) + '\n';
  }
  return out;
}

std::vector<policy::TrainingSample> samples_from_records(
    std::span<const traj::Trajectory> records, const policy::ModelSpec& spec) {
  std::map<std::pair<std::string, std::uint64_t>, sim::Episode> expert_cache;
  std::vector<policy::TrainingSample> samples;
  const auto a_dim = static_cast<Eigen::Index>(spec.action_dim());
  for (const traj::Trajectory& record : records) {
    const sim::Task task = sim::make_task(record.task_id());
    const std::uint64_t layout_seed = std::stoull(meta_at(record, "layout_seed"));
    keyframe::KeyframeSet ks;
    ks.indices = parse_indices(meta_at(record, "keyframes"));
    const policy::IntentEmbedding intent = policy::encode_intent(ks, record, spec.intent);

    const auto key = std::make_pair(record.task_id(), layout_seed);
    auto it = expert_cache.find(key);
    if (it == expert_cache.end()) {
      it = expert_cache.emplace(key, sim::run_expert(task, layout_seed)).first;
    }
    const sim::Episode& episode = it->second;
    for (std::size_t t = 0; t < episode.actions.size(); ++t) {
      policy::ActionChunk chunk{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(spec.horizon), a_dim)};
      for (std::size_t h = 0; h < spec.horizon && t + h < episode.actions.size(); ++h) {
        const sim::Action& a = episode.actions[t + h];
        chunk.actions.row(static_cast<Eigen::Index>(h)) << a.displacement.x(), a.displacement.y(), a.grasp;
      }
      samples.push_back({policy::build_context(spec, observe(episode.states[t], task.task_id), intent),
                         policy::normalize_chunk(spec, chunk)});
    }
  }
  return samples;
}

TrainedPolicy train_pipeline(const PipelineConfig& config) {
  const sim::Task task = sim::make_task(config.task_id);
  const std::vector<traj::Trajectory> demos =
      expert_demos(task, config.n_demos, config.data_seed);
  const PreprocessResult pre =
      preprocess_demos(demos, config, derive_seed(config.data_seed, "perturb"));
  const policy::ModelSpec spec = make_model_spec(task, config);
  const std::vector<policy::TrainingSample> samples = samples_from_records(pre.records, spec);
  policy::TrainResult result = policy::train(samples, config.training);
  std::vector<std::size_t> counts;
  for (const PreprocessSummaryRow& r : pre.summary) counts.push_back(r.keyframe_count);
  return {policy::PolicyModel(spec, std::move(result.net)), std::move(result.loss_history),
          std::move(result.fault), std::move(counts)};
}

std::shared_ptr<const TrainedPolicy> TrainingCache::get(const PipelineConfig& config) {
  const std::string key = pipeline_config_key(config);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    it = entries_.emplace(key, std::make_shared<const TrainedPolicy>(train_pipeline(config))).first;
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Controllers and rollouts

PolicyController::PolicyController(const policy::PolicyModel& model, std::string task_id,
                                   policy::IntentEmbedding intent)
    : model_(model), task_id_(std::move(task_id)), intent_(std::move(intent)) {}

policy::ActionChunk PolicyController::act(const sim::WorldState& state,
                                          std::uint64_t seed) const {
  return model_.act(observe(state, task_id_), intent_, seed);
}

ExpertController::ExpertController(sim::Task task, std::size_t horizon)
    : task_(std::move(task)), horizon_(horizon) {}

policy::ActionChunk ExpertController::act(const sim::WorldState& state, std::uint64_t) const {
  const std::vector<sim::Action> actions = sim::expert_chunk(task_, state, horizon_);
  policy::ActionChunk chunk{Eigen::MatrixXd(static_cast<Eigen::Index>(horizon_), 3)};
  for (std::size_t h = 0; h < horizon_; ++h) {
    chunk.actions.row(static_cast<Eigen::Index>(h)) << actions[h].displacement.x(),
        actions[h].displacement.y(), actions[h].grasp;
  }
  return chunk;
}

sim::Action to_action(const policy::ActionChunk& chunk, std::size_t row) {
  const auto r = static_cast<Eigen::Index>(row);
  return {sim::Vec2(chunk.actions(r, 0), chunk.actions(r, 1)), chunk.actions(r, 2)};
}

Rollout rollout(const Controller& controller, const sim::Task& task, sim::WorldState initial,
                std::size_t step_cap, std::uint64_t seed) {
  Rollout r;
  r.states.push_back(std::move(initial));
  if (sim::is_success(r.states.back(), task)) {
    r.success = true;
    return r;
  }
  for (std::uint64_t query = 0; r.actions.size() < step_cap; ++query) {
    const policy::ActionChunk chunk = controller.act(r.states.back(), derive_seed(seed, query));
    for (std::size_t h = 0; h < chunk.horizon() && r.actions.size() < step_cap; ++h) {
      const sim::Action a = to_action(chunk, h);
      r.actions.push_back(a);
      r.states.push_back(sim::step(task, r.states.back(), a));
      if (sim::is_success(r.states.back(), task)) {
        r.success = true;
        return r;
      }
    }
  }
  r.capped = true;
  return r;
}

std::size_t step_cap_for(const sim::Task& task, std::uint64_t layout_seed) {
  return 4 * sim::run_expert(task, layout_seed).actions.size();
}

// ---------------------------------------------------------------------------
// Episodes

std::string EpisodeRecord::to_json_line() const {
  json j{{"task_id", task_id},
         {"seed", seed},
         {"profile", profile},
         {"method", method},
         {"condition", condition},
         {"operator_steps", operator_steps},
         {"rollout_steps", rollout_steps},
         {"success", success},
         {"keyframe_count", keyframe_count},
         {"sigma", sigma},
         {"eta", eta}};
  return j.dump();
}

EpisodeRecord run_adaptor_episode(const policy::PolicyModel& model, const sim::Task& task,
                                  const sim::OperatorProfile& profile, std::uint64_t seed,
                                  double eta, double intent_fraction) {
  if (!(intent_fraction > 0.0 && intent_fraction <= 1.0)) {
    throw ContractViolation("intent_fraction must lie in (0, 1]");
  }
  const sim::Episode op = sim::run_operator(task, profile, seed);
  traj::Trajectory demo = op.trajectory(task);
  if (intent_fraction < 1.0) {
    const auto keep = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(intent_fraction * static_cast<double>(demo.size()) - 1e-12)));
    if (keep < demo.size()) demo = demo.prefix(keep);
  }
  const IntentResult intent = infer_intent(demo, eta, model.spec().intent);
  const PolicyController controller(model, task.task_id, intent.embedding);
  const Rollout ro = rollout(controller, task, op.states.front(), step_cap_for(task, seed),
                             derive_seed(seed, "policy"));
  EpisodeRecord rec;
  rec.task_id = task.task_id;
  rec.seed = seed;
  rec.profile = profile.proficiency_label;
  rec.method = "adaptor";
  rec.operator_steps = demo.size() - 1;
  rec.rollout_steps = ro.actions.size();
  rec.success = ro.success;
  rec.keyframe_count = intent.keyframes.size();
  rec.eta = eta;
  return rec;
}

EpisodeRecord run_raw_replay_episode(const sim::Task& task, const sim::OperatorProfile& profile,
                                     std::uint64_t seed) {
  const sim::Episode op = sim::run_operator(task, profile, seed);
  EpisodeRecord rec;
  rec.task_id = task.task_id;
  rec.seed = seed;
  rec.profile = profile.proficiency_label;
  rec.method = "raw_replay";
  rec.operator_steps = op.actions.size();
  rec.success = sim::is_success(op.final_state(), task);
  return rec;
}

// ---------------------------------------------------------------------------
// Tables

const ResultRow* ResultTable::find(const std::string& method, const std::string& condition) const {
  for (const ResultRow& r : rows) {
    if (r.method == method && r.condition == condition) return &r;
  }
  return nullptr;
}

std::string ResultTable::to_csv() const {
  std::string out =
      "method,condition,parameter,rollouts,successes,success_rate,mean_operator_steps,"
      "mean_keyframes,std_dev,failed\n";
  for (const ResultRow& r : rows) {
    out += r.method + ',' + r.condition + ',' + fmt(r.parameter) + ',' +
           std::to_string(r.rollouts) + ',' + std::to_string(r.successes) + ',' +
           fmt(r.success_rate) + ',' + fmt(r.mean_operator_steps) + ',' +
           fmt(r.mean_keyframes) + ',' + fmt(r.std_dev) + ',' + (r.failed ? "1" : "0") + '\n';
  }
  return out;
}

std::string ResultTable::summary() const {
  std::ostringstream s;
  s << name << '\n';
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-22s %9s %10s %10s %9s\n", "method", "condition",
                "success%", "op_steps", "keyframes", "sd%");
  s << line;
  for (const ResultRow& r : rows) {
    std::snprintf(line, sizeof line, "%-12s %-22s %9.2f %10.2f %10.2f %9.2f%s\n",
                  r.method.c_str(), r.condition.c_str(), 100.0 * r.success_rate,
                  r.mean_operator_steps, r.mean_keyframes, r.std_dev,
                  r.failed ? "  FAILED" : "");
    s << line;
    if (!r.note.empty()) s << "  note: " << r.note << '\n';
  }
  return s.str();
}

ResultRow summarize(const std::string& method, const std::string& condition, double parameter,
                    std::span<const EpisodeRecord> episodes) {
  ResultRow row;
  row.method = method;
  row.condition = condition;
  row.parameter = parameter;
  row.rollouts = episodes.size();
  double steps = 0.0;
  double keyframes = 0.0;
  for (const EpisodeRecord& e : episodes) {
    row.successes += e.success ? 1 : 0;
    steps += static_cast<double>(e.operator_steps);
    keyframes += static_cast<double>(e.keyframe_count);
  }
  if (!episodes.empty()) {
    const double n = static_cast<double>(episodes.size());
    row.success_rate = static_cast<double>(row.successes) / n;
    row.mean_operator_steps = steps / n;
    row.mean_keyframes = keyframes / n;
  }
  return row;
}

void assign_std_devs(ResultTable& table) {
  std::map<std::string, std::vector<double>> by_method;
  for (const ResultRow& r : table.rows) {
    if (!r.failed) by_method[r.method].push_back(100.0 * r.success_rate);
  }
  for (ResultRow& r : table.rows) {
    const std::vector<double>& v = by_method[r.method];
    if (v.size() < 2) {
      r.std_dev = 0.0;
      continue;
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    r.std_dev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
}

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  if (sigma_grid.empty() || eta_grid.empty() || profiles.empty()) {
    throw ContractViolation("experiment grids must be nonempty");
  }
  if (rollouts == 0 || cross_rollouts == 0) throw ContractViolation("rollouts must be >= 1");
  for (const double s : sigma_grid) {
    if (!(s >= 0.0)) throw ContractViolation("sigma grid values must be >= 0");
  }
  for (const double e : eta_grid) {
    if (!(e > 0.0)) throw ContractViolation("eta grid values must be > 0");
  }
}

namespace {

json training_json(const policy::TrainConfig& t) {
  return {{"epochs", t.epochs},         {"batch_size", t.batch_size},
          {"optimizer", t.optimizer}, {"learning_rate", t.learning_rate},
          {"momentum", t.momentum},
          {"grad_clip", t.grad_clip},   {"seed", t.seed},
          {"hidden", t.hidden}};
}

void read_training(const json& j, policy::TrainConfig& t) {
  t.epochs = j.value("epochs", t.epochs);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.optimizer = j.value("optimizer", t.optimizer);
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  t.momentum = j.value("momentum", t.momentum);
  t.grad_clip = j.value("grad_clip", t.grad_clip);
  t.seed = j.value("seed", t.seed);
  t.hidden = j.value("hidden", t.hidden);
}

}  // namespace

std::string pipeline_config_key(const PipelineConfig& p) {
  json j{{"task", p.task_id},
         {"sigma", p.sigma},
         {"ramp_schedule", p.ramp_schedule},
         {"eta", p.eta},
         {"truncate_min_frac", p.truncate_min_frac},
         {"n_demos", p.n_demos},
         {"perturbations_per_demo", p.perturbations_per_demo},
         {"slots", p.slots},
         {"horizon", p.horizon},
         {"flow_steps", p.flow_steps},
         {"data_seed", p.data_seed},
         {"training", training_json(p.training)}};
  return j.dump();
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what(), 0);
  }
  ExperimentConfig c;
  PipelineConfig& p = c.pipeline;
  try {
    p.task_id = j.value("task", p.task_id);
    p.sigma = j.value("sigma", p.sigma);
    p.ramp_schedule = j.value("ramp_schedule", p.ramp_schedule);
    p.eta = j.value("eta", p.eta);
    p.truncate_min_frac = j.value("truncate_min_frac", p.truncate_min_frac);
    p.n_demos = j.value("n_demos", p.n_demos);
    p.perturbations_per_demo = j.value("perturbations_per_demo", p.perturbations_per_demo);
    p.slots = j.value("slots", p.slots);
    p.horizon = j.value("horizon", p.horizon);
    p.flow_steps = j.value("flow_steps", p.flow_steps);
    p.data_seed = j.value("data_seed", p.data_seed);
    if (j.contains("training")) read_training(j.at("training"), p.training);
    c.sigma_grid = j.value("sigma_grid", c.sigma_grid);
    c.eta_grid = j.value("eta_grid", c.eta_grid);
    c.profiles = j.value("profiles", c.profiles);
    c.eval_profile = j.value("eval_profile", c.eval_profile);
    c.rollouts = j.value("rollouts", c.rollouts);
    c.cross_rollouts = j.value("cross_rollouts", c.cross_rollouts);
    c.decomposition_episodes = j.value("decomposition_episodes", c.decomposition_episodes);
    c.eval_seed = j.value("eval_seed", c.eval_seed);
    c.output_dir = j.value("output_dir", c.output_dir.string());
  } catch (const json::exception& e) {
    throw FormatError(std::string("config field has the wrong type: ") + e.what(), 0);
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string(), 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

std::string experiment_config_to_json(const ExperimentConfig& c) {
  json j = json::parse(pipeline_config_key(c.pipeline));
  j["sigma_grid"] = c.sigma_grid;
  j["eta_grid"] = c.eta_grid;
  j["profiles"] = c.profiles;
  j["eval_profile"] = c.eval_profile;
  j["rollouts"] = c.rollouts;
  j["cross_rollouts"] = c.cross_rollouts;
  j["decomposition_episodes"] = c.decomposition_episodes;
  j["eval_seed"] = c.eval_seed;
  j["output_dir"] = c.output_dir.string();
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

std::shared_ptr<const TrainedPolicy> trained_for(const PipelineConfig& pipeline,
                                                TrainingCache* cache) {
  if (cache) return cache->get(pipeline);
  return std::make_shared<const TrainedPolicy>(train_pipeline(pipeline));
}

ResultRow evaluate_cell(const ExperimentConfig& config, const PipelineConfig& pipeline,
                        const std::string& condition, double parameter,
                        std::vector<EpisodeRecord>& log, TrainingCache* cache) {
  const std::shared_ptr<const TrainedPolicy> held = trained_for(pipeline, cache);
  const TrainedPolicy& trained = *held;
  if (trained.fault) {
    ResultRow row;
    row.method = "adaptor";
    row.condition = condition;
    row.parameter = parameter;
    row.failed = true;
    row.note = *trained.fault;
    return row;
  }
  const sim::Task task = sim::make_task(pipeline.task_id);
  const sim::OperatorProfile profile = sim::make_profile(config.eval_profile);
  std::vector<EpisodeRecord> episodes;
  episodes.reserve(config.rollouts);
  for (std::size_t r = 0; r < config.rollouts; ++r) {
    EpisodeRecord e = run_adaptor_episode(trained.model, task, profile,
                                          derive_seed(config.eval_seed, r), pipeline.eta);
    e.condition = condition;
    e.sigma = pipeline.sigma;
    episodes.push_back(std::move(e));
  }
  log.insert(log.end(), episodes.begin(), episodes.end());
  return summarize("adaptor", condition, parameter, episodes);
}

}  // namespace

ExperimentOutput run_noise_ablation(const ExperimentConfig& config, TrainingCache* cache) {
  config.validate();
  ExperimentOutput out;
  out.table.name = "noise_ablation";
  for (const double sigma : config.sigma_grid) {
    PipelineConfig p = config.pipeline;
    p.sigma = sigma;
    out.table.rows.push_back(
        evaluate_cell(config, p, "sigma=" + fmt_short(sigma), sigma, out.episodes, cache));
  }
  assign_std_devs(out.table);
  return out;
}

ExperimentOutput run_budget_ablation(const ExperimentConfig& config, TrainingCache* cache) {
  config.validate();
  ExperimentOutput out;
  out.table.name = "budget_ablation";
  for (const double eta : config.eta_grid) {
    PipelineConfig p = config.pipeline;
    p.eta = eta;
    out.table.rows.push_back(
        evaluate_cell(config, p, "eta=" + fmt_short(eta), eta, out.episodes, cache));
  }
  assign_std_devs(out.table);
  return out;
}

ExperimentOutput run_cross_operator(const ExperimentConfig& config, TrainingCache* cache) {
  config.validate();
  for (const std::string& label : sim::builtin_profile_labels()) {
    if (std::find(config.profiles.begin(), config.profiles.end(), label) == config.profiles.end()) {
      throw ContractViolation("cross-operator run needs profile '" + label + "'");
    }
  }
  ExperimentOutput out;
  out.table.name = "cross_operator";
  const PipelineConfig& p = config.pipeline;
  const sim::Task task = sim::make_task(p.task_id);
  const std::shared_ptr<const TrainedPolicy> held = trained_for(p, cache);
  const TrainedPolicy& trained = *held;

  std::vector<ResultRow> raw_rows;
  std::vector<ResultRow> adaptor_rows;
  for (const std::string& label : config.profiles) {
    const sim::OperatorProfile profile = sim::make_profile(label);
    std::vector<EpisodeRecord> raw;
    std::vector<EpisodeRecord> adaptor;
    for (std::size_t r = 0; r < config.cross_rollouts; ++r) {
      const std::uint64_t seed = derive_seed(config.eval_seed, r);
      EpisodeRecord e = run_raw_replay_episode(task, profile, seed);
      e.condition = label;
      e.sigma = p.sigma;
      e.eta = p.eta;
      raw.push_back(e);
      if (!trained.fault) {
        EpisodeRecord a = run_adaptor_episode(trained.model, task, profile, seed, p.eta);
        a.condition = label;
        a.sigma = p.sigma;
        adaptor.push_back(a);
      }
    }
    raw_rows.push_back(summarize("raw_replay", label, 0.0, raw));
    ResultRow arow = summarize("adaptor", label, 0.0, adaptor);
    if (trained.fault) {
      arow.failed = true;
      arow.note = *trained.fault;
    }
    adaptor_rows.push_back(arow);
    out.episodes.insert(out.episodes.end(), raw.begin(), raw.end());
    out.episodes.insert(out.episodes.end(), adaptor.begin(), adaptor.end());
  }
  out.table.rows = raw_rows;
  out.table.rows.insert(out.table.rows.end(), adaptor_rows.begin(), adaptor_rows.end());
  assign_std_devs(out.table);
  return out;
}

void write_experiment_output(const std::filesystem::path& dir, const ExperimentOutput& out) {
  std::filesystem::create_directories(dir);
  write_text(dir / (out.table.name + ".csv"), out.table.to_csv());
  write_text(dir / (out.table.name + "_summary.txt"), out.table.summary());
  std::string log;
  for (const EpisodeRecord& e : out.episodes) log += e.to_json_line() + '\n';
  write_text(dir / (out.table.name + "_episodes.jsonl"), log);
}

// ---------------------------------------------------------------------------
// Loss decomposition

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

LossDecomposition estimate_loss_decomposition(const ControllerFactory& policy,
                                              const sim::Task& task,
                                              const policy::BoxNormalizer& action_bounds,
                                              std::size_t n, std::uint64_t seed) {
  if (action_bounds.dim() != 3) {
    throw ContractViolation("estimate_loss_decomposition: action bounds must have 3 coordinates");
  }
  if (n == 0) throw ContractViolation("estimate_loss_decomposition: n must be >= 1");
  std::vector<double> supervised;
  std::vector<double> on_policy;
  LossDecomposition d;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t episode_seed = derive_seed(seed, i);
    const sim::Episode expert = sim::run_expert(task, episode_seed);
    const std::unique_ptr<Controller> controller = policy(expert.states.front(), episode_seed);

    double sum = 0.0;
    for (std::size_t t = 0; t < expert.actions.size(); ++t) {
      const policy::ActionChunk chunk = controller->act(expert.states[t], derive_seed(episode_seed, t));
      sum += sq_action_error(to_action(chunk, 0), expert.actions[t], action_bounds);
    }
    supervised.push_back(sum / static_cast<double>(expert.actions.size()));

    const Rollout ro = rollout(*controller, task, expert.states.front(),
                               4 * expert.actions.size(), derive_seed(episode_seed, "rollout"));
    if (ro.capped) ++d.capped_rollouts;
    sum = 0.0;
    for (std::size_t t = 0; t < ro.actions.size(); ++t) {
      sum += sq_action_error(ro.actions[t], sim::expert_action(task, ro.states[t]), action_bounds);
    }
    on_policy.push_back(ro.actions.empty() ? 0.0 : sum / static_cast<double>(ro.actions.size()));
  }
  d.episodes = n;
  d.supervised = mean(supervised);
  d.on_policy = mean(on_policy);
  d.shift = d.on_policy - d.supervised;
  d.supervised_se = standard_error(supervised);
  d.on_policy_se = standard_error(on_policy);
  return d;
}

std::string decomposition_csv(const LossDecomposition& d) {
  return "supervised,on_policy,shift,supervised_se,on_policy_se,episodes,capped_rollouts\n" +
         fmt(d.supervised) + ',' + fmt(d.on_policy) + ',' + fmt(d.shift) + ',' +
         fmt(d.supervised_se) + ',' + fmt(d.on_policy_se) + ',' + std::to_string(d.episodes) +
         ',' + std::to_string(d.capped_rollouts) + '\n';
}

ControllerFactory policy_factory(const policy::PolicyModel& model, const sim::Task& task,
                                 double eta) {
  return [&model, task, eta](const sim::WorldState&, std::uint64_t seed) {
    const traj::Trajectory demo = sim::expert_demo(task, seed);
    return std::make_unique<PolicyController>(model, task.task_id,
                                              infer_intent(demo, eta, model.spec().intent).embedding);
  };
}

}  // namespace intent_assist::eval
