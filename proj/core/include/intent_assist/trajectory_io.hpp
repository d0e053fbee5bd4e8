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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intent_assist/trajectory.hpp"

namespace intent_assist::traj {

// Line-delimited JSON, one trajectory per line:
//
//   {"task_id": "transfer", "timestamps": [0, 0.1, ...],
//    "points": [[x, y, g], ...], "meta": {"key": "value"}}
//
// "dt" may replace "timestamps" on input. Output always carries explicit
// timestamps. Blank lines are skipped.
Trajectory parse_trajectory_line(std::string_view line, std::size_t line_number = 0);
std::string to_json_line(const Trajectory& trajectory);

std::vector<Trajectory> read_trajectories(std::istream& in);
std::vector<Trajectory> read_trajectory_file(const std::filesystem::path& path);

void write_trajectories(std::ostream& out, std::span<const Trajectory> trajectories);
void write_trajectory_file(const std::filesystem::path& path,
                           std::span<const Trajectory> trajectories);

}  // namespace intent_assist::traj
