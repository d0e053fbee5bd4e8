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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "intent_assist/trajectory.hpp"

namespace intent_assist::sim {

using Vec2 = Eigen::Vector2d;

struct Box {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Ones();

  bool contains(const Vec2& p) const;
  Vec2 clamp(const Vec2& p) const;
  Vec2 center() const { return 0.5 * (lo + hi); }
};

struct ObjectState {
  Vec2 position = Vec2::Zero();
  bool held = false;
};

struct TargetZone {
  Vec2 position = Vec2::Zero();
  double radius = 0.0;
};

// One pick-and-place assignment. The goal list is the episode's latent
// intent: it drives the scripted expert and the synthetic operators but is
// never exposed in the policy's observation.
struct Goal {
  std::size_t object = 0;
  std::size_t target = 0;
};

struct WorldState {
  Vec2 agent = Vec2::Zero();
  bool grasp = false;  // gripper closed
  std::vector<ObjectState> objects;
  std::vector<TargetZone> targets;
  std::vector<Goal> goals;
  Box bounds;
  std::size_t step_count = 0;
  std::size_t invalid_actions = 0;  // non-finite actions treated as no-ops

  std::optional<std::size_t> held_object() const;
  bool operator==(const WorldState& other) const;
};

// 2D displacement plus a grasp command (>= 0.5 closes the gripper).
struct Action {
  Vec2 displacement = Vec2::Zero();
  double grasp = 0.0;
};

inline constexpr std::size_t kActionDim = 3;
inline constexpr std::size_t kPointDim = 3;  // agent x, y, gripper state

struct Task {
  std::string task_id;
  Box bounds;
  Box agent_region;
  std::vector<Box> object_regions;
  std::vector<Box> target_regions;
  std::size_t goal_count = 1;
  double min_separation = 0.15;
  double target_radius = 0.06;
  double grasp_radius = 0.05;
  double max_step = 0.05;
  double expert_speed = 0.04;
  double dt = 0.1;
  std::size_t max_layout_attempts = 500;
  std::size_t max_demo_steps = 400;
};

// "transfer": two objects, two targets, one hidden object->target goal.
// "organize2": two objects to two targets, both goals hidden.
// "mirror": one object at the bottom center, targets left and right.
Task make_task(std::string_view task_id);
std::vector<std::string> builtin_task_ids();

struct OperatorProfile {
  std::string proficiency_label;
  double tremor_sigma = 0.0;         // per-step displacement noise
  double waypoint_bias_sigma = 0.0;  // per-waypoint aim offset
  double overshoot_gain = 1.0;       // >= 1; aims past each waypoint first
};

// novice, intermediate, expert. Parameters are non-increasing in that order.
OperatorProfile make_profile(std::string_view label);
std::vector<std::string> builtin_profile_labels();

// Deterministic initial layout. Throws LayoutError when rejection sampling
// cannot satisfy the separation constraint.
WorldState reset(const Task& task, std::uint64_t seed);

// Moves the agent by the displacement clipped to max_step and to bounds,
// then applies the grasp rule. Held objects track the agent exactly.
WorldState step(const Task& task, const WorldState& state, const Action& action);

bool goal_satisfied(const Task& task, const WorldState& state, const Goal& goal);
bool is_success(const WorldState& state, const Task& task);

// Scripted controller: reach, grasp, carry, release, per goal in order.
Action expert_action(const Task& task, const WorldState& state);

// The expert's next `horizon` actions, obtained by simulating it forward.
std::vector<Action> expert_chunk(const Task& task, const WorldState& state,
                                 std::size_t horizon);

// Visited states (one more than actions) with the agent trajectory
// (x, y, gripper) sampled at each state.
struct Episode {
  std::vector<WorldState> states;
  std::vector<Action> actions;

  traj::Trajectory trajectory(const Task& task, traj::Meta meta = {}) const;
  const WorldState& final_state() const { return states.back(); }
};

Episode run_expert(const Task& task, std::uint64_t seed);
traj::Trajectory expert_demo(const Task& task, std::uint64_t seed);

Episode run_operator(const Task& task, const OperatorProfile& profile,
                     std::uint64_t seed);
traj::Trajectory operator_demo(const Task& task, const OperatorProfile& profile,
                               std::uint64_t seed);

traj::Point agent_point(const WorldState& state);

}  // namespace intent_assist::sim
