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
#include <span>
#include <vector>

#include "intent_assist/trajectory.hpp"

namespace intent_assist::keyframe {

// Tolerance applied to every comparison against the budget.
inline constexpr double kBudgetTolerance = 1e-12;

// Positive, finite reconstruction budget in workspace units.
class ErrorBudget {
 public:
  explicit ErrorBudget(double eta);
  double value() const { return eta_; }

 private:
  double eta_;
};

struct KeyframeSet {
  std::vector<std::size_t> indices;  // 0 = t_0 < ... < t_L = T
  double eta = 0.0;
  double achieved_error = 0.0;

  std::size_t size() const { return indices.size(); }
};

// True iff every source point k in [i, j] lies within eta of the segment
// [x_i, x_j].
bool segment_feasible(const traj::Trajectory& source, std::size_t i, std::size_t j,
                      double eta, std::span<const double> weights = {});

// Minimum-cardinality keyframe set under the per-segment criterion, ties
// broken toward the lexicographically smallest index sequence.
//
// Feasible edges (i, j) form a DAG over 0..T. Hop distances to T are found
// by a backward sweep; the path is then read forward, always taking the
// smallest next index that stays on a shortest path. O(T^3) point-segment
// evaluations in the worst case.
KeyframeSet extract_keyframes(const traj::Trajectory& source, ErrorBudget eta,
                              std::span<const double> weights = {});

inline constexpr std::size_t kBruteForceMaxLength = 14;

// Exhaustive reference: subsets containing {0, T} in order of cardinality,
// then lexicographically. Refuses sources longer than kBruteForceMaxLength.
KeyframeSet brute_force_keyframes(const traj::Trajectory& source, ErrorBudget eta,
                                  std::span<const double> weights = {});

// directed_hausdorff(source, reconstruct_linear(ks, source)).
double validate_keyframes(const traj::Trajectory& source, const KeyframeSet& ks,
                          std::span<const double> weights = {});

traj::Trajectory reconstruct_linear(const KeyframeSet& ks, const traj::Trajectory& source);

}  // namespace intent_assist::keyframe
