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

#include "intent_assist/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "intent_assist/error.hpp"

namespace intent_assist::traj {

namespace {

void check_dims(const Point& a, const Point& b, const char* where) {
  if (a.size() != b.size()) {
    throw ContractViolation(std::string(where) + ": dimension mismatch (" +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  }
}

void check_weights(std::span<const double> weights, Eigen::Index dim) {
  if (!weights.empty() && static_cast<Eigen::Index>(weights.size()) != dim) {
    throw ContractViolation("weight mask has " + std::to_string(weights.size()) +
                            " entries, points have dimension " +
                            std::to_string(dim));
  }
}

}  // namespace

Trajectory::Trajectory(std::vector<Point> points, std::vector<double> timestamps,
                       std::string task_id, Meta meta)
    : points_(std::move(points)),
      timestamps_(std::move(timestamps)),
      task_id_(std::move(task_id)),
      meta_(std::move(meta)) {
  if (points_.size() < 2) {
    throw ContractViolation("trajectory needs >= 2 points, got " +
                            std::to_string(points_.size()));
  }
  if (timestamps_.size() != points_.size()) {
    throw ContractViolation("trajectory has " + std::to_string(points_.size()) +
                            " points but " + std::to_string(timestamps_.size()) +
                            " timestamps");
  }
  const Eigen::Index d = points_.front().size();
  if (d < 1) throw ContractViolation("trajectory points must have dimension >= 1");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].size() != d) {
      throw ContractViolation("point " + std::to_string(i) + " has dimension " +
                              std::to_string(points_[i].size()) + ", expected " +
                              std::to_string(d));
    }
    if (!points_[i].allFinite()) {
      throw ContractViolation("point " + std::to_string(i) + " is not finite");
    }
    if (!std::isfinite(timestamps_[i]) || timestamps_[i] < 0.0) {
      throw ContractViolation("timestamp " + std::to_string(i) +
                              " must be finite and non-negative");
    }
    if (i > 0 && !(timestamps_[i] > timestamps_[i - 1])) {
      throw ContractViolation("timestamps must be strictly increasing at index " +
                              std::to_string(i));
    }
  }
}

Trajectory Trajectory::with_uniform_time(std::vector<Point> points, double dt,
                                         std::string task_id, Meta meta) {
  if (!(dt > 0.0)) throw ContractViolation("dt must be positive");
  std::vector<double> ts(points.size());
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = dt * static_cast<double>(i);
  return Trajectory(std::move(points), std::move(ts), std::move(task_id),
                    std::move(meta));
}

Trajectory Trajectory::prefix(std::size_t n) const {
  if (n < 2 || n > size()) {
    throw ContractViolation("prefix length " + std::to_string(n) +
                            " outside [2, " + std::to_string(size()) + "]");
  }
  return Trajectory({points_.begin(), points_.begin() + static_cast<std::ptrdiff_t>(n)},
                    {timestamps_.begin(), timestamps_.begin() + static_cast<std::ptrdiff_t>(n)},
                    task_id_, meta_);
}

Trajectory Trajectory::with_points(std::vector<Point> points) const {
  return Trajectory(std::move(points), timestamps_, task_id_, meta_);
}

Trajectory Trajectory::with_meta(const std::string& key, std::string value) const {
  Meta meta = meta_;
  meta[key] = std::move(value);
  return Trajectory(points_, timestamps_, task_id_, std::move(meta));
}

Point Trajectory::evaluate(double t) const {
  if (t <= timestamps_.front()) return points_.front();
  if (t >= timestamps_.back()) return points_.back();
  const auto it = std::upper_bound(timestamps_.begin(), timestamps_.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - timestamps_.begin());
  const std::size_t lo = hi - 1;
  const double s = (t - timestamps_[lo]) / (timestamps_[hi] - timestamps_[lo]);
  return points_[lo] + s * (points_[hi] - points_[lo]);
}

double point_segment_distance(const Point& p, const Point& a, const Point& b,
                              std::span<const double> weights) {
  check_dims(p, a, "point_segment_distance");
  check_dims(p, b, "point_segment_distance");
  check_weights(weights, p.size());
  const Eigen::Index d = p.size();
  const double* w = weights.empty() ? nullptr : weights.data();
  double len2 = 0.0;
  double proj = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double wi = w ? w[i] : 1.0;
    const double ab = b[i] - a[i];
    len2 += wi * ab * ab;
    proj += wi * (p[i] - a[i]) * ab;
  }
  const double s = len2 > 0.0 ? std::clamp(proj / len2, 0.0, 1.0) : 0.0;
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double wi = w ? w[i] : 1.0;
    const double r = (p[i] - a[i]) - s * (b[i] - a[i]);
    r2 += wi * r * r;
  }
  return std::sqrt(r2);
}

double directed_hausdorff(std::span<const Point> raw,
                          std::span<const Point> polyline,
                          std::span<const double> weights) {
  if (raw.empty() || polyline.empty()) {
    throw ContractViolation("directed_hausdorff: point sets must be nonempty");
  }
  double worst = 0.0;
  for (const Point& x : raw) {
    double best = std::numeric_limits<double>::infinity();
    if (polyline.size() == 1) {
      best = point_segment_distance(x, polyline[0], polyline[0], weights);
    }
    for (std::size_t k = 0; k + 1 < polyline.size() && best > 0.0; ++k) {
      best = std::min(best, point_segment_distance(x, polyline[k], polyline[k + 1], weights));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

double directed_hausdorff(const Trajectory& raw, const Trajectory& polyline,
                          std::span<const double> weights) {
  return directed_hausdorff(std::span<const Point>(raw.points()),
                            std::span<const Point>(polyline.points()), weights);
}

Trajectory reconstruct_linear(std::span<const std::size_t> indices,
                              const Trajectory& source) {
  if (indices.size() < 2) {
    throw ContractViolation("reconstruction needs >= 2 keyframe indices");
  }
  if (indices.front() != 0 || indices.back() != source.size() - 1) {
    throw ContractViolation("keyframe indices must start at 0 and end at " +
                            std::to_string(source.size() - 1));
  }
  std::vector<Point> points;
  std::vector<double> ts;
  points.reserve(indices.size());
  ts.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (k > 0 && indices[k] <= indices[k - 1]) {
      throw ContractViolation("keyframe indices must be strictly increasing");
    }
    if (indices[k] >= source.size()) {
      throw ContractViolation("keyframe index " + std::to_string(indices[k]) +
                              " out of range");
    }
    points.push_back(source.point(indices[k]));
    ts.push_back(source.timestamp(indices[k]));
  }
  return Trajectory(std::move(points), std::move(ts), source.task_id(), source.meta());
}

}  // namespace intent_assist::traj
