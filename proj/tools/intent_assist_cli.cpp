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

// intent-assist command line: demo generation, preprocessing, training,
// rollouts, experiment tables and the teleoperation backend.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "intent_assist/checkpoint.hpp"
#include "intent_assist/error.hpp"
#include "intent_assist/experiment.hpp"
#include "intent_assist/rng.hpp"
#include "intent_assist/service.hpp"
#include "intent_assist/trajectory_io.hpp"

namespace ia = intent_assist;
namespace fs = std::filesystem;

namespace {

ia::eval::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return ia::eval::load_experiment_config(path);
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ia::Error("cannot write " + path.string());
  out << text;
}

void log_line(const std::string& text) { std::cerr << text << '\n'; }

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// --- demos -----------------------------------------------------------------

struct DemosArgs {
  std::string task = "transfer";
  std::string profile = "scripted";
  std::size_t count = 16;
  std::uint64_t seed = 1;
  std::string out;
};

int run_demos(const DemosArgs& a) {
  const ia::sim::Task task = ia::sim::make_task(a.task);
  std::vector<ia::traj::Trajectory> demos;
  for (std::size_t i = 0; i < a.count; ++i) {
    const std::uint64_t s = ia::derive_seed(a.seed, i);
    demos.push_back(a.profile == "scripted"
                        ? ia::sim::expert_demo(task, s)
                        : ia::sim::operator_demo(task, ia::sim::make_profile(a.profile), s));
  }
  std::ostringstream buf;
  ia::traj::write_trajectories(buf, demos);
  write_file(a.out, buf.str());
  log_line("wrote " + std::to_string(demos.size()) + " demos to " + a.out);
  return 0;
}

// --- preprocess ------------------------------------------------------------

struct PreprocessArgs {
  std::string config;
  std::string in;
  std::string out;
  std::string summary;
  std::optional<double> sigma;
  std::optional<double> eta;
  std::optional<double> truncate_min_frac;
  std::optional<std::size_t> per_demo;
  std::uint64_t seed = 0;
};

int run_preprocess(const PreprocessArgs& a) {
  ia::eval::PipelineConfig p = load_config(a.config).pipeline;
  if (a.sigma) p.sigma = *a.sigma;
  if (a.eta) p.eta = *a.eta;
  if (a.truncate_min_frac) p.truncate_min_frac = *a.truncate_min_frac;
  if (a.per_demo) p.perturbations_per_demo = *a.per_demo;
  const std::vector<ia::traj::Trajectory> demos = ia::traj::read_trajectory_file(a.in);
  const ia::eval::PreprocessResult r = ia::eval::preprocess_demos(demos, p, a.seed);
  ia::traj::write_trajectory_file(a.out, r.records);
  if (!a.summary.empty()) write_file(a.summary, ia::eval::summary_csv(r.summary));
  log_line("wrote " + std::to_string(r.records.size()) + " records to " + a.out);
  return 0;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_train(const TrainArgs& a) {
  ia::eval::PipelineConfig p = load_config(a.config).pipeline;
  if (a.seed) p.training.seed = *a.seed;
  const Timer timer;
  const ia::eval::TrainedPolicy t = ia::eval::train_pipeline(p);
  ia::policy::save_checkpoint(a.out, t.model, t.loss_history);
  char line[160];
  std::snprintf(line, sizeof line, "trained %zu epochs in %.1fs, final loss %.4f",
                t.loss_history.size(), timer.seconds(),
                t.loss_history.empty() ? 0.0 : t.loss_history.back());
  log_line(line);
  if (t.fault) {
    log_line("training stopped early: " + *t.fault);
    return 3;
  }
  return 0;
}

// --- rollout ---------------------------------------------------------------

struct RolloutArgs {
  std::string checkpoint;
  std::string profile = "novice";
  std::size_t count = 20;
  std::uint64_t seed = 1000;
  double eta = 0.05;
  double intent_fraction = 1.0;
  std::string out;
};

int run_rollouts(const RolloutArgs& a) {
  const ia::policy::PolicyModel model = ia::policy::load_checkpoint(a.checkpoint);
  const ia::sim::Task task = ia::sim::make_task(model.spec().task_ids.front());
  const ia::sim::OperatorProfile profile = ia::sim::make_profile(a.profile);
  std::vector<ia::eval::EpisodeRecord> episodes;
  std::string log;
  for (std::size_t i = 0; i < a.count; ++i) {
    ia::eval::EpisodeRecord e = ia::eval::run_adaptor_episode(
        model, task, profile, ia::derive_seed(a.seed, i), a.eta, a.intent_fraction);
    e.condition = a.profile;
    log += e.to_json_line() + '\n';
    episodes.push_back(std::move(e));
  }
  const ia::eval::ResultRow row = ia::eval::summarize("adaptor", a.profile, a.eta, episodes);
  if (!a.out.empty()) write_file(a.out, log);
  char line[160];
  std::snprintf(line, sizeof line, "%zu/%zu successful (%.1f%%)", row.successes, row.rollouts,
                100.0 * row.success_rate);
  std::cout << line << '\n';
  return 0;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string config;
  std::string experiment = "all";
  std::optional<std::uint64_t> seed;
  std::string out;
};

void run_decomposition(const ia::eval::ExperimentConfig& c, ia::eval::TrainingCache& cache,
                       const fs::path& dir) {
  const ia::sim::Task task = ia::sim::make_task(c.pipeline.task_id);
  const auto trained = cache.get(c.pipeline);
  const std::uint64_t seed = ia::derive_seed(c.eval_seed, "decomposition");
  const ia::eval::LossDecomposition learned = ia::eval::estimate_loss_decomposition(
      ia::eval::policy_factory(trained->model, task, c.pipeline.eta), task,
      trained->model.spec().action_bounds, c.decomposition_episodes, seed);
  const ia::policy::ModelSpec spec = trained->model.spec();
  const ia::policy::PolicyModel untrained(
      spec, ia::policy::VectorFieldNet(spec.chunk_dim(), spec.context_dim(),
                                       spec.training.hidden, spec.training.seed));
  const ia::eval::LossDecomposition random = ia::eval::estimate_loss_decomposition(
      ia::eval::policy_factory(untrained, task, c.pipeline.eta), task, spec.action_bounds,
      c.decomposition_episodes, seed);
  const ia::eval::ControllerFactory expert = [&task, &c](const ia::sim::WorldState&,
                                                          std::uint64_t) {
    return std::make_unique<ia::eval::ExpertController>(task, c.pipeline.horizon);
  };
  const ia::eval::LossDecomposition scripted =
      ia::eval::estimate_loss_decomposition(expert, task, spec.action_bounds,
                                            c.decomposition_episodes, seed);
  std::string csv;
  const auto add = [&csv](const std::string& name, const ia::eval::LossDecomposition& d) {
    const std::string text = ia::eval::decomposition_csv(d);
    const std::size_t split = text.find('\n') + 1;
    if (csv.empty()) csv = "policy," + text.substr(0, split);
    csv += name + ',' + text.substr(split);
  };
  add("scripted_expert", scripted);
  add("trained", learned);
  add("untrained", random);
  write_file(dir / "decomposition.csv", csv);
}

int run_eval(const EvalArgs& a) {
  ia::eval::ExperimentConfig c = load_config(a.config);
  if (a.seed) c.eval_seed = *a.seed;
  const fs::path dir = a.out.empty() ? c.output_dir : fs::path(a.out);
  fs::create_directories(dir);
  write_file(dir / "config.json", ia::eval::experiment_config_to_json(c) + '\n');
  ia::eval::TrainingCache cache;
  const bool all = a.experiment == "all";
  const auto run = [&](const char* name, auto&& fn) {
    if (!all && a.experiment != name) return;
    const Timer timer;
    const ia::eval::ExperimentOutput out = fn();
    ia::eval::write_experiment_output(dir, out);
    std::cout << out.table.summary();
    char line[96];
    std::snprintf(line, sizeof line, "[%s finished in %.1fs]\n", name, timer.seconds());
    std::cout << line << std::flush;
  };
  run("noise", [&] { return ia::eval::run_noise_ablation(c, &cache); });
  run("budget", [&] { return ia::eval::run_budget_ablation(c, &cache); });
  run("cross", [&] { return ia::eval::run_cross_operator(c, &cache); });
  if (all || a.experiment == "decomposition") {
    const Timer timer;
    run_decomposition(c, cache, dir);
    std::cout << "[decomposition finished in " << timer.seconds() << "s]\n";
  }
  return 0;
}

// --- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string config;
  std::string checkpoint;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t seed = 0;
};

int run_serve(const ServeArgs& a) {
  const ia::eval::ExperimentConfig c = load_config(a.config);
  ia::service::ServiceConfig sc;
  sc.task_id = c.pipeline.task_id;
  sc.eta = c.pipeline.eta;
  sc.horizon = c.pipeline.horizon;
  sc.default_seed = a.seed;
  std::optional<ia::policy::PolicyModel> model;
  if (!a.checkpoint.empty()) {
    model.emplace(ia::policy::load_checkpoint(a.checkpoint));
    sc.task_id = model->spec().task_ids.front();
  } else {
    log_line("no checkpoint given: rollouts use the scripted expert");
  }
  ia::service::Service svc(sc, std::move(model));
  log_line("listening on http://" + a.host + ":" + std::to_string(a.port));
  svc.listen(a.host, a.port);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"intent-assist: keyframe intent modeling and intent-conditioned flow policies"};
  app.require_subcommand(1);

  DemosArgs demos;
  auto* d = app.add_subcommand("demos", "Write scripted or synthetic-operator demos as JSONL");
  d->add_option("--task", demos.task, "Task id")->capture_default_str();
  d->add_option("--profile", demos.profile, "scripted, novice, intermediate or expert")->capture_default_str();
  d->add_option("--count", demos.count)->capture_default_str();
  d->add_option("--seed", demos.seed)->capture_default_str();
  d->add_option("--out", demos.out)->required();

  PreprocessArgs pre;
  auto* p = app.add_subcommand("preprocess", "Perturb, truncate and keyframe a demo file");
  p->add_option("--config", pre.config, "Experiment config (JSON); supplies defaults");
  p->add_option("--in", pre.in)->required();
  p->add_option("--out", pre.out)->required();
  p->add_option("--summary", pre.summary, "Per-record CSV summary");
  p->add_option("--sigma", pre.sigma);
  p->add_option("--eta", pre.eta);
  p->add_option("--truncate-min-frac", pre.truncate_min_frac);
  p->add_option("--per-demo", pre.per_demo, "Perturbed records per demo");
  p->add_option("--seed", pre.seed)->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a policy on the configured pipeline");
  t->add_option("--config", tr.config);
  t->add_option("--seed", tr.seed, "Overrides the training seed");
  t->add_option("--out", tr.out, "Checkpoint path")->required();

  RolloutArgs ro;
  auto* r = app.add_subcommand("rollout", "Roll out a checkpoint on synthetic-operator intents");
  r->add_option("--checkpoint", ro.checkpoint)->required();
  r->add_option("--profile", ro.profile)->capture_default_str();
  r->add_option("--count", ro.count)->capture_default_str();
  r->add_option("--seed", ro.seed)->capture_default_str();
  r->add_option("--eta", ro.eta)->capture_default_str();
  r->add_option("--intent-fraction", ro.intent_fraction, "Keep this prefix of each operator demo")
      ->capture_default_str();
  r->add_option("--out", ro.out, "Episode log (JSONL)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Run experiment tables");
  e->add_option("experiment", ev.experiment, "noise, budget, cross, decomposition or all")
      ->check(CLI::IsMember({"noise", "budget", "cross", "decomposition", "all"}))
      ->capture_default_str();
  e->add_option("--config", ev.config);
  e->add_option("--seed", ev.seed, "Overrides the evaluation seed");
  e->add_option("--out", ev.out, "Output directory (defaults to the config's)");

  ServeArgs sv;
  auto* s = app.add_subcommand("serve", "Serve the teleoperation HTTP API");
  s->add_option("--config", sv.config);
  s->add_option("--checkpoint", sv.checkpoint);
  s->add_option("--host", sv.host)->capture_default_str();
  s->add_option("--port", sv.port)->capture_default_str();
  s->add_option("--seed", sv.seed, "First server-chosen layout seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (d->parsed()) return run_demos(demos);
    if (p->parsed()) return run_preprocess(pre);
    if (t->parsed()) return run_train(tr);
    if (r->parsed()) return run_rollouts(ro);
    if (e->parsed()) return run_eval(ev);
    if (s->parsed()) return run_serve(sv);
  } catch (const ia::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  return 1;
}
