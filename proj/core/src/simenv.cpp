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

#include "intent_assist/simenv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "intent_assist/error.hpp"
#include "intent_assist/rng.hpp"

namespace intent_assist::sim {

namespace {

// Distance below which the expert considers a waypoint reached.
constexpr double kArriveTolerance = 1e-9;

Vec2 sample_in(const Box& box, Rng& rng) {
  return {rng.uniform(box.lo.x(), box.hi.x()), rng.uniform(box.lo.y(), box.hi.y())};
}

Vec2 approach(const Vec2& from, const Vec2& to, double speed) {
  const Vec2 delta = to - from;
  const double dist = delta.norm();
  if (dist <= speed) return delta;
  return delta * (speed / dist);
}

std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.uniform_index(i)]);
  return p;
}

Box box(double x0, double y0, double x1, double y1) { return {Vec2(x0, y0), Vec2(x1, y1)}; }

}  // namespace

bool Box::contains(const Vec2& p) const {
  return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
}

Vec2 Box::clamp(const Vec2& p) const {
  return {std::clamp(p.x(), lo.x(), hi.x()), std::clamp(p.y(), lo.y(), hi.y())};
}

std::optional<std::size_t> WorldState::held_object() const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].held) return i;
  }
  return std::nullopt;
}

bool WorldState::operator==(const WorldState& o) const {
  if (agent != o.agent || grasp != o.grasp || step_count != o.step_count ||
      invalid_actions != o.invalid_actions || bounds.lo != o.bounds.lo ||
      bounds.hi != o.bounds.hi || objects.size() != o.objects.size() ||
      targets.size() != o.targets.size() || goals.size() != o.goals.size()) {
    return false;
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].position != o.objects[i].position || objects[i].held != o.objects[i].held) {
      return false;
    }
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].position != o.targets[i].position || targets[i].radius != o.targets[i].radius) {
      return false;
    }
  }
  for (std::size_t i = 0; i < goals.size(); ++i) {
    if (goals[i].object != o.goals[i].object || goals[i].target != o.goals[i].target) {
      return false;
    }
  }
  return true;
}

Task make_task(std::string_view task_id) {
  Task task;
  task.task_id = std::string(task_id);
  task.bounds = box(0.0, 0.0, 1.0, 1.0);
  task.agent_region = box(0.35, 0.05, 0.65, 0.2);
  if (task_id == "transfer" || task_id == "organize2") {
    task.object_regions = {box(0.08, 0.3, 0.42, 0.55), box(0.58, 0.3, 0.92, 0.55)};
    task.target_regions = {box(0.08, 0.7, 0.42, 0.92), box(0.58, 0.7, 0.92, 0.92)};
    task.goal_count = task_id == "transfer" ? 1 : 2;
  } else if (task_id == "mirror") {
    task.agent_region = box(0.45, 0.05, 0.55, 0.12);
    task.object_regions = {box(0.45, 0.3, 0.55, 0.4)};
    task.target_regions = {box(0.08, 0.65, 0.25, 0.85), box(0.75, 0.65, 0.92, 0.85)};
    task.goal_count = 1;
  } else {
    throw ContractViolation("unknown task id '" + std::string(task_id) + "'");
  }
  return task;
}

std::vector<std::string> builtin_task_ids() { return {"transfer", "organize2", "mirror"}; }

OperatorProfile make_profile(std::string_view label) {
  if (label == "expert") return {"expert", 0.002, 0.01, 1.0};
  if (label == "intermediate") return {"intermediate", 0.006, 0.03, 1.15};
  if (label == "novice") return {"novice", 0.012, 0.05, 1.3};
  throw ContractViolation("unknown operator profile '" + std::string(label) + "'");
}

std::vector<std::string> builtin_profile_labels() { return {"novice", "intermediate", "expert"}; }

WorldState reset(const Task& task, std::uint64_t seed) {
  if (task.goal_count > task.object_regions.size() ||
      task.goal_count > task.target_regions.size()) {
    throw ContractViolation("task '" + task.task_id + "' has more goals than objects or targets");
  }
  Rng rng(derive_seed(seed, "layout"));
  WorldState state;
  state.bounds = task.bounds;
  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt == task.max_layout_attempts) {
      throw LayoutError("task '" + task.task_id + "': no layout with separation " +
                        std::to_string(task.min_separation) + " after " +
                        std::to_string(attempt) + " attempts");
    }
    std::vector<Vec2> placed{sample_in(task.agent_region, rng)};
    for (const Box& r : task.object_regions) placed.push_back(sample_in(r, rng));
    for (const Box& r : task.target_regions) placed.push_back(sample_in(r, rng));
    bool ok = true;
    for (std::size_t i = 0; ok && i < placed.size(); ++i) {
      ok = task.bounds.contains(placed[i]);
      for (std::size_t j = 0; ok && j < i; ++j) {
        ok = (placed[i] - placed[j]).norm() >= task.min_separation;
      }
    }
    if (!ok) continue;
    state.agent = placed[0];
    state.objects.clear();
    state.targets.clear();
    for (std::size_t i = 0; i < task.object_regions.size(); ++i) {
      state.objects.push_back({placed[1 + i], false});
    }
    for (std::size_t i = 0; i < task.target_regions.size(); ++i) {
      state.targets.push_back({placed[1 + task.object_regions.size() + i], task.target_radius});
    }
    break;
  }
  const auto object_order = permutation(state.objects.size(), rng);
  const auto target_order = permutation(state.targets.size(), rng);
  for (std::size_t g = 0; g < task.goal_count; ++g) {
    state.goals.push_back({object_order[g], target_order[g]});
  }
  return state;
}

WorldState step(const Task& task, const WorldState& state, const Action& action) {
  WorldState next = state;
  ++next.step_count;
  if (!action.displacement.allFinite() || !std::isfinite(action.grasp)) {
    ++next.invalid_actions;
    return next;
  }
  Vec2 delta = action.displacement;
  const double length = delta.norm();
  if (length > task.max_step) delta *= task.max_step / length;
  next.agent = next.bounds.clamp(state.agent + delta);

  if (action.grasp >= 0.5) {
    next.grasp = true;
    if (!next.held_object()) {
      std::optional<std::size_t> best;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < next.objects.size(); ++i) {
        const double d = (next.objects[i].position - next.agent).norm();
        if (d <= task.grasp_radius && d < best_dist) {
          best = i;
          best_dist = d;
        }
      }
      if (best) next.objects[*best].held = true;
    }
  } else {
    next.grasp = false;
    for (ObjectState& o : next.objects) o.held = false;
  }
  for (ObjectState& o : next.objects) {
    if (o.held) o.position = next.agent;
  }
  return next;
}

bool goal_satisfied(const Task& task, const WorldState& state, const Goal& goal) {
  (void)task;
  const ObjectState& obj = state.objects.at(goal.object);
  const TargetZone& zone = state.targets.at(goal.target);
  return !obj.held && (obj.position - zone.position).norm() <= zone.radius;
}

bool is_success(const WorldState& state, const Task& task) {
  if (state.goals.empty()) return false;
  return std::all_of(state.goals.begin(), state.goals.end(),
                     [&](const Goal& g) { return goal_satisfied(task, state, g); });
}

Action expert_action(const Task& task, const WorldState& state) {
  const auto held = state.held_object();
  for (const Goal& goal : state.goals) {
    if (goal_satisfied(task, state, goal)) continue;
    if (held && *held == goal.object) {
      const Vec2& target = state.targets[goal.target].position;
      if ((target - state.agent).norm() <= kArriveTolerance) return {Vec2::Zero(), 0.0};
      return {approach(state.agent, target, task.expert_speed), 1.0};
    }
    if (held) return {Vec2::Zero(), 0.0};  // wrong object: drop it
    const Vec2& object = state.objects[goal.object].position;
    if ((object - state.agent).norm() <= kArriveTolerance) return {Vec2::Zero(), 1.0};
    return {approach(state.agent, object, task.expert_speed), 0.0};
  }
  return {Vec2::Zero(), 0.0};
}

std::vector<Action> expert_chunk(const Task& task, const WorldState& state,
                                 std::size_t horizon) {
  std::vector<Action> chunk;
  chunk.reserve(horizon);
  WorldState s = state;
  for (std::size_t h = 0; h < horizon; ++h) {
    const Action a = expert_action(task, s);
    chunk.push_back(a);
    s = step(task, s, a);
  }
  return chunk;
}

traj::Point agent_point(const WorldState& state) {
  traj::Point p(3);
  p << state.agent.x(), state.agent.y(), state.grasp ? 1.0 : 0.0;
  return p;
}

traj::Trajectory Episode::trajectory(const Task& task, traj::Meta meta) const {
  std::vector<traj::Point> points;
  points.reserve(states.size());
  for (const WorldState& s : states) points.push_back(agent_point(s));
  return traj::Trajectory::with_uniform_time(std::move(points), task.dt, task.task_id,
                                             std::move(meta));
}

Episode run_expert(const Task& task, std::uint64_t seed) {
  Episode ep;
  ep.states.push_back(reset(task, seed));
  while (!is_success(ep.states.back(), task)) {
    if (ep.actions.size() >= task.max_demo_steps) {
      throw Error("scripted expert failed on task '" + task.task_id + "' seed " +
                  std::to_string(seed) + "; environment bug");
    }
    const Action a = expert_action(task, ep.states.back());
    ep.actions.push_back(a);
    ep.states.push_back(step(task, ep.states.back(), a));
  }
  return ep;
}

namespace {

traj::Meta demo_meta(const Task& task, std::uint64_t seed, const std::string& profile) {
  return {{"layout_seed", std::to_string(seed)},
          {"profile", profile},
          {"source_id", task.task_id + "/" + std::to_string(seed)}};
}

}  // namespace

traj::Trajectory expert_demo(const Task& task, std::uint64_t seed) {
  return run_expert(task, seed).trajectory(task, demo_meta(task, seed, "scripted"));
}

Episode run_operator(const Task& task, const OperatorProfile& profile,
                     std::uint64_t seed) {
  if (profile.tremor_sigma < 0.0 || profile.waypoint_bias_sigma < 0.0 ||
      profile.overshoot_gain < 1.0) {
    throw ContractViolation("operator profile '" + profile.proficiency_label +
                            "' has out-of-range parameters");
  }
  Episode ep;
  ep.states.push_back(reset(task, seed));
  Rng rng(derive_seed(seed, "operator"));

  auto apply = [&](const Action& a) {
    ep.actions.push_back(a);
    ep.states.push_back(step(task, ep.states.back(), a));
  };
  auto tremor = [&] {
    const double tx = rng.normal();
    const double ty = rng.normal();
    return Vec2(profile.tremor_sigma * tx, profile.tremor_sigma * ty);
  };
  auto biased = [&](const Vec2& p) {
    const double bx = rng.normal();
    const double by = rng.normal();
    return task.bounds.clamp(p + profile.waypoint_bias_sigma * Vec2(bx, by));
  };
  auto move_to = [&](const Vec2& aim, double grasp) {
    while (ep.actions.size() < task.max_demo_steps) {
      const Vec2& at = ep.states.back().agent;
      const double dist = (aim - at).norm();
      if (dist <= kArriveTolerance) return;
      const bool arriving = dist <= task.expert_speed;
      apply({approach(at, aim, task.expert_speed) + tremor(), grasp});
      if (arriving) return;
    }
  };
  auto traverse = [&](const Vec2& aim, double grasp) {
    if (profile.overshoot_gain > 1.0) {
      const Vec2 start = ep.states.back().agent;
      move_to(task.bounds.clamp(aim + (profile.overshoot_gain - 1.0) * (aim - start)), grasp);
    }
    move_to(aim, grasp);
  };

  const WorldState initial = ep.states.front();
  for (const Goal& goal : initial.goals) {
    traverse(biased(initial.objects[goal.object].position), 0.0);
    apply({tremor(), 1.0});
    traverse(biased(initial.targets[goal.target].position), 1.0);
    apply({tremor(), 0.0});
  }
  return ep;
}

traj::Trajectory operator_demo(const Task& task, const OperatorProfile& profile,
                               std::uint64_t seed) {
  return run_operator(task, profile, seed)
      .trajectory(task, demo_meta(task, seed, profile.proficiency_label));
}

}  // namespace intent_assist::sim
