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
#include "intent_assist/rng.hpp"
#include "intent_assist/simenv.hpp"

namespace intent_assist {
namespace {

using namespace sim;

bool same_layout(const WorldState& a, const WorldState& b) { return a == b; }

TEST(Reset, DeterministicPerSeed) {
  for (const std::string& id : builtin_task_ids()) {
    const Task task = make_task(id);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      EXPECT_TRUE(same_layout(reset(task, seed), reset(task, seed)));
    }
    EXPECT_FALSE(same_layout(reset(task, 1), reset(task, 2)));
  }
}

TEST(Reset, RespectsSeparationAndBounds) {
  const Task task = make_task("organize2");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const WorldState s = reset(task, seed);
    std::vector<Vec2> pts{s.agent};
    for (const auto& o : s.objects) pts.push_back(o.position);
    for (const auto& t : s.targets) pts.push_back(t.position);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      EXPECT_TRUE(s.bounds.contains(pts[i]));
      for (std::size_t j = i + 1; j < pts.size(); ++j) EXPECT_GE((pts[i] - pts[j]).norm(), task.min_separation);
    }
    EXPECT_EQ(s.goals.size(), 2u);
  }
}

TEST(Reset, ImpossibleSeparationThrows) {
  Task task = make_task("transfer");
  task.min_separation = 5.0;
  EXPECT_THROW(reset(task, 0), LayoutError);
}

TEST(Tasks, UnknownIdsThrow) {
  EXPECT_THROW(make_task("juggle"), ContractViolation);
  EXPECT_THROW(make_profile("wizard"), ContractViolation);
}

TEST(Step, ZeroActionWithOpenGripperOnlyCounts) {
  const Task task = make_task("transfer");
  const WorldState s = reset(task, 3);
  WorldState next = step(task, s, Action{});
  EXPECT_EQ(next.step_count, s.step_count + 1);
  next.step_count = s.step_count;
  EXPECT_TRUE(next == s);
}

TEST(Step, NonFiniteActionIsCountedNoOp) {
  const Task task = make_task("transfer");
  const WorldState s = reset(task, 3);
  WorldState next = step(task, s, Action{Vec2(NAN, 0.0), 1.0});
  EXPECT_EQ(next.invalid_actions, 1u);
  EXPECT_EQ(next.step_count, 1u);
  next.invalid_actions = 0;
  next.step_count = 0;
  EXPECT_TRUE(next == s);
}

TEST(Step, DisplacementIsClipped) {
  const Task task = make_task("transfer");
  const WorldState s = reset(task, 4);
  const WorldState next = step(task, s, Action{Vec2(1.0, 0.0), 0.0});
  EXPECT_LE((next.agent - s.agent).norm(), task.max_step + 1e-15);
}

TEST(Step, RandomActionsKeepCouplingAndBounds) {
  for (const std::string& id : builtin_task_ids()) {
    const Task task = make_task(id);
    Rng rng(derive_seed(5, id));
    for (int episode = 0; episode < 20; ++episode) {
      WorldState s = reset(task, static_cast<std::uint64_t>(episode));
      for (int t = 0; t < 200; ++t) {
        s = step(task, s, Action{Vec2(rng.normal(0, 0.05), rng.normal(0, 0.05)), rng.uniform()});
        EXPECT_TRUE(s.bounds.contains(s.agent));
        for (const ObjectState& o : s.objects) {
          EXPECT_TRUE(s.bounds.contains(o.position));
          if (o.held) {
            EXPECT_EQ(o.position, s.agent);
          }
        }
      }
    }
  }
}

TEST(Step, SameActionsSameStates) {
  const Task task = make_task("organize2");
  Rng a(1), b(1);
  WorldState sa = reset(task, 9), sb = reset(task, 9);
  for (int t = 0; t < 100; ++t) {
    sa = step(task, sa, Action{Vec2(a.normal(0, 0.05), a.normal(0, 0.05)), a.uniform()});
    sb = step(task, sb, Action{Vec2(b.normal(0, 0.05), b.normal(0, 0.05)), b.uniform()});
    EXPECT_TRUE(sa == sb);
  }
}

TEST(Success, InitialStateIsNotSuccess) {
  for (const std::string& id : builtin_task_ids()) {
    const Task task = make_task(id);
    for (std::uint64_t seed = 0; seed < 50; ++seed) EXPECT_FALSE(is_success(reset(task, seed), task));
  }
}

TEST(Success, ExpertAlwaysSucceeds) {
  for (const std::string& id : builtin_task_ids()) {
    const Task task = make_task(id);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const Episode e = run_expert(task, seed);
      EXPECT_TRUE(is_success(e.final_state(), task)) << id << " seed " << seed;
      EXPECT_EQ(e.states.size(), e.actions.size() + 1);
    }
  }
}

TEST(Success, HeldObjectOnTargetIsNotSuccess) {
  const Task task = make_task("transfer");
  const Episode e = run_expert(task, 2);
  WorldState s = e.final_state();
  const std::size_t obj = s.goals.front().object;
  s.objects[obj].held = true;
  s.grasp = true;
  s.agent = s.objects[obj].position;
  EXPECT_LE((s.objects[obj].position - s.targets[s.goals.front().target].position).norm(), task.target_radius);
  EXPECT_FALSE(goal_satisfied(task, s, s.goals.front()));
  EXPECT_FALSE(is_success(s, task));
}

TEST(Expert, ChunkMatchesStepwiseExpert) {
  const Task task = make_task("organize2");
  const Episode e = run_expert(task, 6);
  const std::vector<Action> chunk = expert_chunk(task, e.states.front(), 8);
  ASSERT_EQ(chunk.size(), 8u);
  for (std::size_t t = 0; t < 8; ++t) {
    EXPECT_EQ(chunk[t].displacement, e.actions[t].displacement);
    EXPECT_EQ(chunk[t].grasp, e.actions[t].grasp);
  }
}

TEST(Operators, ZeroNoiseProfileReproducesExpert) {
  const Task task = make_task("transfer");
  const OperatorProfile perfect{"perfect", 0.0, 0.0, 1.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(operator_demo(task, perfect, seed).points(), expert_demo(task, seed).points());
  }
}

TEST(Operators, ProficiencyOrderingOnRawReplay) {
  const Task task = make_task("transfer");
  std::vector<int> successes;
  for (const char* label : {"expert", "intermediate", "novice"}) {
    const OperatorProfile p = make_profile(label);
    int n = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      n += is_success(run_operator(task, p, seed).final_state(), task) ? 1 : 0;
    }
    successes.push_back(n);
  }
  EXPECT_GE(successes[0], successes[1]);
  EXPECT_GE(successes[1], successes[2]);
}

TEST(Operators, DemosAreDeterministicAndTagged) {
  const Task task = make_task("transfer");
  const OperatorProfile p = make_profile("novice");
  const traj::Trajectory a = operator_demo(task, p, 5);
  EXPECT_EQ(a.points(), operator_demo(task, p, 5).points());
  EXPECT_EQ(a.meta().at("profile"), "novice");
  EXPECT_EQ(a.dim(), kPointDim);
}

}  // namespace
}  // namespace intent_assist
