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

#include "intent_assist/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "intent_assist/error.hpp"
#include "intent_assist/rng.hpp"

namespace intent_assist::perturb {

namespace {

constexpr double kPsdTolerance = 1e-12;

std::vector<double> resolve_mask(std::span<const double> mask, std::size_t dim) {
  if (mask.empty()) return std::vector<double>(dim, 1.0);
  if (mask.size() != dim) {
    throw ContractViolation("mask has " + std::to_string(mask.size()) +
                            " entries, expected " + std::to_string(dim));
  }
  for (const double m : mask) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw ContractViolation("mask weights must be finite and non-negative");
    }
  }
  return {mask.begin(), mask.end()};
}

void check_kernel_args(std::size_t length, std::size_t dim, double sigma) {
  if (length < 2) throw ContractViolation("kernel length must be >= 2");
  if (dim < 1) throw ContractViolation("kernel dimension must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ContractViolation("sigma must be finite and non-negative");
  }
}

std::string describe(const char* kind, double sigma, std::span<const double> mask) {
  std::ostringstream name;
  name << kind << "(sigma=" << sigma << ",mask=";
  for (std::size_t i = 0; i < mask.size(); ++i) name << (i ? ":" : "") << mask[i];
  name << ')';
  return name.str();
}

// Returns L with L * L^T == block. Diagonal blocks take the cheap path.
Eigen::MatrixXd block_factor(const Eigen::MatrixXd& block) {
  const Eigen::MatrixXd off = block - Eigen::MatrixXd(block.diagonal().asDiagonal());
  if (off.cwiseAbs().maxCoeff() == 0.0) {
    return Eigen::MatrixXd(block.diagonal().cwiseMax(0.0).cwiseSqrt().asDiagonal());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
  const Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * roots.asDiagonal();
}

}  // namespace

PerturbationKernel build_kernel(std::size_t length, std::size_t dim, double sigma,
                                std::span<const double> mask) {
  check_kernel_args(length, dim, sigma);
  const std::vector<double> m = resolve_mask(mask, dim);
  Eigen::VectorXd diag(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) diag[static_cast<Eigen::Index>(i)] = sigma * sigma * m[i];
  const Eigen::MatrixXd block = diag.asDiagonal();
  return {std::vector<Eigen::MatrixXd>(length, block), describe("isotropic", sigma, m)};
}

PerturbationKernel build_ramp_kernel(std::size_t length, std::size_t dim,
                                     double sigma, std::span<const double> mask) {
  check_kernel_args(length, dim, sigma);
  const std::vector<double> m = resolve_mask(mask, dim);
  PerturbationKernel kernel;
  kernel.schedule_name = describe("ramp", sigma, m);
  kernel.blocks.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    const double s = sigma * static_cast<double>(t) / static_cast<double>(length - 1);
    Eigen::VectorXd diag(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) diag[static_cast<Eigen::Index>(i)] = s * s * m[i];
    kernel.blocks.emplace_back(diag.asDiagonal());
  }
  return kernel;
}

void validate_kernel(const PerturbationKernel& kernel) {
  if (kernel.blocks.empty()) throw ContractViolation("kernel has no blocks");
  const Eigen::Index d = kernel.blocks.front().rows();
  for (std::size_t t = 0; t < kernel.blocks.size(); ++t) {
    const Eigen::MatrixXd& b = kernel.blocks[t];
    if (b.rows() != d || b.cols() != d) {
      throw ContractViolation("kernel block " + std::to_string(t) + " is not " +
                              std::to_string(d) + "x" + std::to_string(d));
    }
    if (!b.allFinite()) throw ContractViolation("kernel block " + std::to_string(t) + " not finite");
    if ((b - b.transpose()).cwiseAbs().maxCoeff() > kPsdTolerance) {
      throw ContractViolation("kernel block " + std::to_string(t) + " not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -kPsdTolerance) {
      throw ContractViolation("kernel block " + std::to_string(t) + " not PSD");
    }
  }
}

PerturbedSample sample_perturbed(const traj::Trajectory& source,
                                 const PerturbationKernel& kernel,
                                 std::uint64_t seed) {
  if (kernel.length() != source.size()) {
    throw ContractViolation("kernel length " + std::to_string(kernel.length()) +
                            " does not match trajectory length " +
                            std::to_string(source.size()));
  }
  if (kernel.dim() != source.dim()) {
    throw ContractViolation("kernel dimension " + std::to_string(kernel.dim()) +
                            " does not match trajectory dimension " +
                            std::to_string(source.dim()));
  }
  validate_kernel(kernel);

  Rng rng(seed);
  const Eigen::Index d = static_cast<Eigen::Index>(source.dim());
  std::vector<traj::Point> points;
  points.reserve(source.size());
  double scale = 0.0;
  Eigen::VectorXd z(d);
  for (std::size_t t = 0; t < source.size(); ++t) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
    const Eigen::MatrixXd& block = kernel.blocks[t];
    scale = std::max(scale, std::sqrt(std::max(0.0, block.diagonal().maxCoeff())));
    traj::Point p = source.point(t);
    if (block.cwiseAbs().maxCoeff() > 0.0) p += block_factor(block) * z;
    points.push_back(std::move(p));
  }
  std::string source_id;
  if (const auto it = source.meta().find("source_id"); it != source.meta().end()) {
    source_id = it->second;
  }
  return {source.with_points(std::move(points)), std::move(source_id), scale, seed};
}

traj::Trajectory truncate_random(const traj::Trajectory& source,
                                 double min_fraction, std::uint64_t seed) {
  if (!(min_fraction > 0.0 && min_fraction <= 1.0)) {
    throw ContractViolation("min_fraction must lie in (0, 1]");
  }
  const std::size_t n = source.size();
  const auto lower = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(min_fraction * static_cast<double>(n) - 1e-12)));
  if (lower >= n) return source;
  Rng rng(seed);
  const std::size_t length = lower + rng.uniform_index(n - lower + 1);
  return length == n ? source : source.prefix(length);
}

ClampResult clamp_to_box(const traj::Trajectory& source, std::span<const double> lo,
                         std::span<const double> hi) {
  if (lo.size() != hi.size() || lo.size() > source.dim()) {
    throw ContractViolation("clamp bounds do not fit the trajectory dimension");
  }
  std::size_t clamped = 0;
  std::vector<traj::Point> points = source.points();
  for (traj::Point& p : points) {
    for (std::size_t i = 0; i < lo.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double c = std::clamp(p[k], lo[i], hi[i]);
      if (c != p[k]) {
        p[k] = c;
        ++clamped;
      }
    }
  }
  return {source.with_points(std::move(points)), clamped};
}

}  // namespace intent_assist::perturb
