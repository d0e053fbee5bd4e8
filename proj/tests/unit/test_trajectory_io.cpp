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

#include <sstream>

#include "intent_assist/error.hpp"
#include "intent_assist/trajectory_io.hpp"
#include "support/oracles.hpp"

namespace intent_assist {
namespace {

TEST(TrajectoryIo, RoundTripIsExact) {
  Rng rng(9);
  std::vector<traj::Trajectory> in;
  for (int i = 0; i < 5; ++i) {
    in.push_back(testing::random_walk(rng, 3 + i, 3).with_meta("source_id", "demo/" + std::to_string(i)));
  }
  std::stringstream buf;
  traj::write_trajectories(buf, in);
  const std::vector<traj::Trajectory> out = traj::read_trajectories(buf);
  ASSERT_EQ(out.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    EXPECT_EQ(out[i].points(), in[i].points());
    EXPECT_EQ(out[i].timestamps(), in[i].timestamps());
    EXPECT_EQ(out[i].meta(), in[i].meta());
  }
}

TEST(TrajectoryIo, DtExpandsToUniformTimestamps) {
  const traj::Trajectory t =
      traj::parse_trajectory_line(R"({"task_id":"transfer","dt":0.5,"points":[[0,0],[1,0],[2,0]]})");
  EXPECT_EQ(t.task_id(), "transfer");
  EXPECT_EQ(t.timestamps(), (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(TrajectoryIo, NonMonotoneTimestampsReportLineNumber) {
  std::stringstream in;
  in << R"({"task_id":"t","dt":1,"points":[[0],[1]]})" << '\n'
     << '\n'
     << R"({"task_id":"t","timestamps":[0,2,1],"points":[[0],[1],[2]]})" << '\n';
  try {
    traj::read_trajectories(in);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3:"), std::string::npos);
  }
}

TEST(TrajectoryIo, RejectsMalformedRecords) {
  EXPECT_THROW(traj::parse_trajectory_line("{not json", 1), FormatError);
  EXPECT_THROW(traj::parse_trajectory_line(R"({"dt":1})", 1), FormatError);
  EXPECT_THROW(traj::parse_trajectory_line(R"({"points":[[0],[1]]})", 1), FormatError);
  EXPECT_THROW(traj::parse_trajectory_line(R"({"dt":1,"points":[[0]]})", 1), FormatError);
  EXPECT_THROW(traj::parse_trajectory_line(R"({"dt":1,"points":[[0],[1,2]]})", 1), FormatError);
}

}  // namespace
}  // namespace intent_assist
