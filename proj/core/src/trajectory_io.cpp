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

#include "intent_assist/trajectory_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "intent_assist/error.hpp"
#include "json.hpp"

namespace intent_assist::traj {

using nlohmann::json;

Trajectory parse_trajectory_line(std::string_view line, std::size_t line_number) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(), line_number);
  }
  if (!record.is_object()) throw FormatError("record must be an object", line_number);

  const auto points_it = record.find("points");
  if (points_it == record.end() || !points_it->is_array()) {
    throw FormatError("missing \"points\" array", line_number);
  }
  std::vector<Point> points;
  points.reserve(points_it->size());
  for (const json& p : *points_it) {
    if (!p.is_array() || p.empty()) {
      throw FormatError("each point must be a nonempty array", line_number);
    }
    Point point(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!p[i].is_number()) throw FormatError("point coordinates must be numbers", line_number);
      point[static_cast<Eigen::Index>(i)] = p[i].get<double>();
    }
    points.push_back(std::move(point));
  }

  std::vector<double> timestamps;
  if (const auto ts = record.find("timestamps"); ts != record.end()) {
    if (!ts->is_array()) throw FormatError("\"timestamps\" must be an array", line_number);
    for (const json& t : *ts) {
      if (!t.is_number()) throw FormatError("timestamps must be numbers", line_number);
      timestamps.push_back(t.get<double>());
    }
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
      if (!(timestamps[i] > timestamps[i - 1])) {
        throw FormatError("timestamps not strictly increasing at index " +
                              std::to_string(i),
                          line_number);
      }
    }
  } else if (const auto dt = record.find("dt"); dt != record.end() && dt->is_number()) {
    const double step = dt->get<double>();
    if (!(step > 0.0)) throw FormatError("\"dt\" must be positive", line_number);
    for (std::size_t i = 0; i < points.size(); ++i) {
      timestamps.push_back(step * static_cast<double>(i));
    }
  } else {
    throw FormatError("record needs \"timestamps\" or \"dt\"", line_number);
  }

  std::string task_id;
  if (const auto t = record.find("task_id"); t != record.end() && t->is_string()) {
    task_id = t->get<std::string>();
  }
  Meta meta;
  if (const auto m = record.find("meta"); m != record.end()) {
    if (!m->is_object()) throw FormatError("\"meta\" must be an object", line_number);
    for (const auto& [key, value] : m->items()) {
      meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
  }

  try {
    return Trajectory(std::move(points), std::move(timestamps), std::move(task_id),
                      std::move(meta));
  } catch (const ContractViolation& e) {
    throw FormatError(e.what(), line_number);
  }
}

std::string to_json_line(const Trajectory& trajectory) {
  json record;
  record["task_id"] = trajectory.task_id();
  record["timestamps"] = trajectory.timestamps();
  json points = json::array();
  for (const Point& p : trajectory.points()) {
    points.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  }
  record["points"] = std::move(points);
  record["meta"] = trajectory.meta();
  return record.dump();
}

std::vector<Trajectory> read_trajectories(std::istream& in) {
  std::vector<Trajectory> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_trajectory_line(line, line_number));
  }
  return out;
}

std::vector<Trajectory> read_trajectory_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string(), 0);
  return read_trajectories(in);
}

void write_trajectories(std::ostream& out, std::span<const Trajectory> trajectories) {
  for (const Trajectory& t : trajectories) out << to_json_line(t) << '\n';
}

void write_trajectory_file(const std::filesystem::path& path,
                           std::span<const Trajectory> trajectories) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string(), 0);
  write_trajectories(out, trajectories);
}

}  // namespace intent_assist::traj
