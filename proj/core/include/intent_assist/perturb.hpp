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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "intent_assist/trajectory.hpp"

namespace intent_assist::perturb {

// Block-diagonal covariance of the Gaussian tube around a demonstration: one
// d x d block per timestep, independent across time.
struct PerturbationKernel {
  std::vector<Eigen::MatrixXd> blocks;
  std::string schedule_name;

  std::size_t length() const { return blocks.size(); }
  std::size_t dim() const { return blocks.empty() ? 0 : static_cast<std::size_t>(blocks.front().rows()); }
};

struct PerturbedSample {
  traj::Trajectory trajectory;
  std::string source_id;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;
};

// Isotropic blocks sigma^2 * diag(mask). An empty mask means all ones.
PerturbationKernel build_kernel(std::size_t length, std::size_t dim, double sigma,
                                std::span<const double> mask = {});

// Linear ramp: block t uses sigma * t / (length - 1), so the start point is
// never perturbed and drift grows toward the end of the motion.
PerturbationKernel build_ramp_kernel(std::size_t length, std::size_t dim,
                                     double sigma, std::span<const double> mask = {});

// Throws ContractViolation on length/dimension mismatch or a block that is
// not symmetric PSD (tolerance 1e-12).
void validate_kernel(const PerturbationKernel& kernel);

// x~_t = x_t + N(0, Lambda_t), drawn independently per timestep.
// Timestamps, task id and meta are carried through unchanged.
PerturbedSample sample_perturbed(const traj::Trajectory& source,
                                 const PerturbationKernel& kernel,
                                 std::uint64_t seed);

// Exact prefix whose length is uniform on
// [max(2, ceil(min_fraction * n)), n] for n = source.size().
traj::Trajectory truncate_random(const traj::Trajectory& source,
                                 double min_fraction, std::uint64_t seed);

struct ClampResult {
  traj::Trajectory trajectory;
  std::size_t clamped_coordinates = 0;
};

// Clamps coordinate i into [lo[i], hi[i]] for the first lo.size() dimensions.
ClampResult clamp_to_box(const traj::Trajectory& source, std::span<const double> lo,
                         std::span<const double> hi);

}  // namespace intent_assist::perturb
