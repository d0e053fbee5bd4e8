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

#include "intent_assist/keyframe.hpp"

#include <cmath>
#include <limits>

#include "intent_assist/error.hpp"

namespace intent_assist::keyframe {

ErrorBudget::ErrorBudget(double eta) : eta_(eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ContractViolation("error budget must be positive and finite");
  }
}

bool segment_feasible(const traj::Trajectory& source, std::size_t i, std::size_t j,
                      double eta, std::span<const double> weights) {
  const traj::Point& a = source.point(i);
  const traj::Point& b = source.point(j);
  for (std::size_t k = i + 1; k < j; ++k) {
    if (traj::point_segment_distance(source.point(k), a, b, weights) >
        eta + kBudgetTolerance) {
      return false;
    }
  }
  return true;
}

namespace {

KeyframeSet finish(std::vector<std::size_t> indices, const traj::Trajectory& source,
                   double eta, std::span<const double> weights) {
  KeyframeSet ks{std::move(indices), eta, 0.0};
  ks.achieved_error = validate_keyframes(source, ks, weights);
  return ks;
}

// Enumerates k-subsets of {1..n} in lexicographic order; returns false when
// exhausted.
bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  const std::size_t k = c.size();
  for (std::size_t pos = k; pos-- > 0;) {
    if (c[pos] < n - (k - 1 - pos)) {
      ++c[pos];
      for (std::size_t q = pos + 1; q < k; ++q) c[q] = c[q - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

KeyframeSet extract_keyframes(const traj::Trajectory& source, ErrorBudget eta,
                              std::span<const double> weights) {
  const std::size_t n = source.size();
  const std::size_t last = n - 1;
  const double budget = eta.value();

  // feasible[i][j] for i < j; consecutive pairs are always feasible.
  std::vector<std::vector<char>> feasible(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      feasible[i][j] = segment_feasible(source, i, j, budget, weights) ? 1 : 0;
    }
  }

  constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> hops(n, kUnreached);
  hops[last] = 0;
  for (std::size_t i = last; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (feasible[i][j] && hops[j] != kUnreached && hops[j] + 1 < hops[i]) {
        hops[i] = hops[j] + 1;
      }
    }
  }

  std::vector<std::size_t> indices{0};
  std::size_t at = 0;
  while (at != last) {
    std::size_t next = at + 1;
    for (std::size_t j = at + 1; j < n; ++j) {
      if (feasible[at][j] && hops[j] + 1 == hops[at]) {
        next = j;
        break;
      }
    }
    indices.push_back(next);
    at = next;
  }
  return finish(std::move(indices), source, budget, weights);
}

KeyframeSet brute_force_keyframes(const traj::Trajectory& source, ErrorBudget eta,
                                  std::span<const double> weights) {
  const std::size_t n = source.size();
  if (n > kBruteForceMaxLength) {
    throw ContractViolation("brute_force_keyframes: source length " + std::to_string(n) +
                            " exceeds " + std::to_string(kBruteForceMaxLength));
  }
  const std::size_t last = n - 1;
  const std::size_t interior = n - 2;
  for (std::size_t k = 0; k <= interior; ++k) {
    std::vector<std::size_t> chosen(k);
    for (std::size_t q = 0; q < k; ++q) chosen[q] = q + 1;
    do {
      std::vector<std::size_t> indices{0};
      indices.insert(indices.end(), chosen.begin(), chosen.end());
      indices.push_back(last);
      bool ok = true;
      for (std::size_t s = 0; ok && s + 1 < indices.size(); ++s) {
        ok = segment_feasible(source, indices[s], indices[s + 1], eta.value(), weights);
      }
      if (ok) return finish(std::move(indices), source, eta.value(), weights);
    } while (k > 0 && next_combination(chosen, interior));
  }
  // Unreachable: the all-indices set is always feasible.
  throw ContractViolation("brute_force_keyframes: no feasible subset");
}

traj::Trajectory reconstruct_linear(const KeyframeSet& ks, const traj::Trajectory& source) {
  return traj::reconstruct_linear(std::span<const std::size_t>(ks.indices), source);
}

double validate_keyframes(const traj::Trajectory& source, const KeyframeSet& ks,
                          std::span<const double> weights) {
  return traj::directed_hausdorff(source, reconstruct_linear(ks, source), weights);
}

}  // namespace intent_assist::keyframe
