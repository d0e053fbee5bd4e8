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
#include "intent_assist/keyframe.hpp"
#include "support/oracles.hpp"

namespace intent_assist {
namespace {

using keyframe::ErrorBudget;
using Indices = std::vector<std::size_t>;

traj::Trajectory l_shape() { return testing::make_traj({{0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}}); }

TEST(Keyframes, CollinearCollapsesToEndpoints) {
  const auto ks = keyframe::extract_keyframes(testing::make_traj({{0, 0}, {1, 0}, {2, 0}, {3, 0}}),
                                              ErrorBudget(0.01));
  EXPECT_EQ(ks.indices, (Indices{0, 3}));
  EXPECT_EQ(ks.achieved_error, 0.0);
}

TEST(Keyframes, LShapeKeepsCorner) {
  EXPECT_EQ(keyframe::extract_keyframes(l_shape(), ErrorBudget(0.1)).indices, (Indices{0, 2, 4}));
  EXPECT_EQ(keyframe::brute_force_keyframes(l_shape(), ErrorBudget(0.1)).indices, (Indices{0, 2, 4}));
}

TEST(Keyframes, HugeBudgetKeepsEndpoints) {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const traj::Trajectory t = testing::random_walk(rng, 30, 3);
    EXPECT_EQ(keyframe::extract_keyframes(t, ErrorBudget(1e6)).indices, (Indices{0, 29}));
  }
  EXPECT_EQ(keyframe::brute_force_keyframes(l_shape(), ErrorBudget(1e6)).indices, (Indices{0, 4}));
}

TEST(Keyframes, TinyBudgetKeepsEveryCorner) {
  Rng rng(2);
  const traj::Trajectory t = testing::random_walk(rng, 25, 2);
  const auto ks = keyframe::extract_keyframes(t, ErrorBudget(1e-15));
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    const bool repeated = t.point(i) == t.point(i - 1) || t.point(i) == t.point(i + 1);
    if (!repeated) EXPECT_NE(std::find(ks.indices.begin(), ks.indices.end(), i), ks.indices.end());
  }
}

TEST(Keyframes, StationaryPhasesCompress) {
  const auto ks = keyframe::extract_keyframes(
      testing::make_traj({{0, 0}, {0, 0}, {0, 0}, {1, 1}, {1, 1}, {1, 1}}), ErrorBudget(1e-9));
  EXPECT_EQ(ks.indices, (Indices{0, 5}));
}

TEST(Keyframes, ValidateAllIndicesIsZero) {
  keyframe::KeyframeSet all;
  all.indices = {0, 1, 2, 3, 4};
  EXPECT_EQ(keyframe::validate_keyframes(l_shape(), all), 0.0);
}

TEST(Keyframes, ValidateEndpointsOfLShape) {
  keyframe::KeyframeSet ends;
  ends.indices = {0, 4};
  EXPECT_NEAR(keyframe::validate_keyframes(l_shape(), ends), 2.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(testing::naive_directed_hausdorff(l_shape().points(), {l_shape().point(0), l_shape().point(4)}),
              2.0 / std::sqrt(2.0), 1e-15);
}

TEST(Keyframes, ValidateRejectsInvalidSets) {
  keyframe::KeyframeSet bad;
  bad.indices = {0, 3, 2, 4};
  EXPECT_THROW(keyframe::validate_keyframes(l_shape(), bad), ContractViolation);
  bad.indices = {1, 4};
  EXPECT_THROW(keyframe::validate_keyframes(l_shape(), bad), ContractViolation);
}

TEST(Keyframes, BudgetMustBePositive) {
  EXPECT_THROW(ErrorBudget(0.0), ContractViolation);
  EXPECT_THROW(ErrorBudget(-1.0), ContractViolation);
  EXPECT_THROW(ErrorBudget(NAN), ContractViolation);
}

TEST(Keyframes, BruteForceRefusesLongSources) {
  Rng rng(3);
  EXPECT_THROW(keyframe::brute_force_keyframes(testing::random_walk(rng, keyframe::kBruteForceMaxLength + 1, 2),
                                               ErrorBudget(0.1)),
               ContractViolation);
}

TEST(Keyframes, MatchesBruteForceExactly) {
  Rng rng(4);
  for (int i = 0; i < 300; ++i) {
    const traj::Trajectory t = testing::random_walk(rng, 2 + rng.uniform_index(12), 1 + rng.uniform_index(3));
    const ErrorBudget eta(rng.uniform(0.01, 0.4));
    const auto fast = keyframe::extract_keyframes(t, eta);
    const auto slow = keyframe::brute_force_keyframes(t, eta);
    EXPECT_EQ(fast.indices, slow.indices);
  }
}

TEST(Keyframes, FeasibleOnLongTrajectories) {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const traj::Trajectory t = testing::random_walk(rng, 200, 3, 0.05);
    const double eta = rng.uniform(0.01, 0.2);
    const auto ks = keyframe::extract_keyframes(t, ErrorBudget(eta));
    EXPECT_LE(keyframe::validate_keyframes(t, ks), eta + keyframe::kBudgetTolerance);
    EXPECT_LE(ks.achieved_error, eta + keyframe::kBudgetTolerance);
    EXPECT_EQ(ks.indices.front(), 0u);
    EXPECT_EQ(ks.indices.back(), 199u);
  }
}

TEST(Keyframes, CardinalityNonIncreasingInBudget) {
  Rng rng(6);
  for (int i = 0; i < 30; ++i) {
    const traj::Trajectory t = testing::random_walk(rng, 40, 2, 0.1);
    std::size_t prev = t.size() + 1;
    for (const double eta : {0.001, 0.005, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0}) {
      const std::size_t n = keyframe::extract_keyframes(t, ErrorBudget(eta)).size();
      EXPECT_LE(n, prev);
      prev = n;
    }
  }
}

TEST(Keyframes, Deterministic) {
  Rng rng(7);
  const traj::Trajectory t = testing::random_walk(rng, 60, 3);
  EXPECT_EQ(keyframe::extract_keyframes(t, ErrorBudget(0.05)).indices,
            keyframe::extract_keyframes(t, ErrorBudget(0.05)).indices);
}

TEST(Keyframes, WeightsExcludeChannel) {
  const double w[] = {1.0, 1.0, 0.0};
  const traj::Trajectory t = testing::make_traj({{0, 0, 0}, {1, 0, 1}, {2, 0, 0}});
  EXPECT_EQ(keyframe::extract_keyframes(t, ErrorBudget(0.01), w).indices, (Indices{0, 2}));
  EXPECT_EQ(keyframe::extract_keyframes(t, ErrorBudget(0.01)).indices, (Indices{0, 1, 2}));
}

}  // namespace
}  // namespace intent_assist
