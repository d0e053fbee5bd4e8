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
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace intent_assist::traj {

using Point = Eigen::VectorXd;
using Meta = std::map<std::string, std::string>;

// Timestamped sequence of d-dimensional points. Immutable after construction;
// the constructor enforces: at least two points, a shared dimension d >= 1,
// finite coordinates, and strictly increasing non-negative timestamps.
class Trajectory {
 public:
  Trajectory(std::vector<Point> points, std::vector<double> timestamps,
             std::string task_id = {}, Meta meta = {});

  // Timestamps 0, dt, 2dt, ...
  static Trajectory with_uniform_time(std::vector<Point> points, double dt,
                                      std::string task_id = {}, Meta meta = {});

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.front().size()); }

  const std::vector<Point>& points() const { return points_; }
  const std::vector<double>& timestamps() const { return timestamps_; }
  const Point& point(std::size_t i) const { return points_.at(i); }
  double timestamp(std::size_t i) const { return timestamps_.at(i); }
  const std::string& task_id() const { return task_id_; }
  const Meta& meta() const { return meta_; }

  // First n points (n >= 2).
  Trajectory prefix(std::size_t n) const;

  // Same timestamps, task id and meta; replaced coordinates.
  Trajectory with_points(std::vector<Point> points) const;

  Trajectory with_meta(const std::string& key, std::string value) const;

  // Piecewise-linear evaluation; clamps outside [t_0, t_T].
  Point evaluate(double t) const;

 private:
  std::vector<Point> points_;
  std::vector<double> timestamps_;
  std::string task_id_;
  Meta meta_;
};

// Euclidean distance from p to the closed segment [a, b]. `weights` is an
// optional per-dimension mask (empty means all ones); a weight of zero drops
// the coordinate from the metric.
double point_segment_distance(const Point& p, const Point& a, const Point& b,
                              std::span<const double> weights = {});

// max over raw points of the min distance to the piecewise-linear curve
// through `polyline`. Not symmetric. A single-vertex polyline degenerates to
// point distance.
double directed_hausdorff(std::span<const Point> raw,
                          std::span<const Point> polyline,
                          std::span<const double> weights = {});

double directed_hausdorff(const Trajectory& raw, const Trajectory& polyline,
                          std::span<const double> weights = {});

// Polyline through source[indices] at the source timestamps. Indices must be
// strictly increasing, start at 0 and end at size() - 1.
Trajectory reconstruct_linear(std::span<const std::size_t> indices,
                              const Trajectory& source);

}  // namespace intent_assist::traj
