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
#include "intent_assist/rng.hpp"
#include "intent_assist/trajectory.hpp"
#include "support/oracles.hpp"

namespace intent_assist {
namespace {

using testing::make_traj;
using testing::point_of;
using traj::Trajectory;

TEST(PointSegmentDistance, InteriorProjection) {
  EXPECT_DOUBLE_EQ(traj::point_segment_distance(point_of({0, 1}), point_of({0, 0}), point_of({2, 0})), 1.0);
}

TEST(PointSegmentDistance, EndpointCoincidence) {
  EXPECT_EQ(traj::point_segment_distance(point_of({0, 0}), point_of({0, 0}), point_of({1, 0})), 0.0);
}

TEST(PointSegmentDistance, DegenerateSegment) {
  EXPECT_DOUBLE_EQ(traj::point_segment_distance(point_of({3, 4}), point_of({0, 0}), point_of({0, 0})), 5.0);
}

TEST(PointSegmentDistance, ProjectionBeyondEndpointUsesEndpoint) {
  EXPECT_DOUBLE_EQ(traj::point_segment_distance(point_of({4, 3}), point_of({0, 0}), point_of({1, 0})),
                   std::hypot(3.0, 3.0));
}

TEST(PointSegmentDistance, DimensionMismatchThrows) {
  EXPECT_THROW(traj::point_segment_distance(point_of({0, 0}), point_of({0, 0, 0}), point_of({1, 0})),
               ContractViolation);
}

TEST(PointSegmentDistance, WeightsDropCoordinates) {
  const double w[] = {1.0, 0.0};
  EXPECT_EQ(traj::point_segment_distance(point_of({0, 5}), point_of({0, 0}), point_of({1, 0}), w), 0.0);
}

TEST(PointSegmentDistance, NeverExceedsEndpointDistance) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto p = point_of({rng.normal(), rng.normal(), rng.normal()});
    const auto a = point_of({rng.normal(), rng.normal(), rng.normal()});
    const auto b = point_of({rng.normal(), rng.normal(), rng.normal()});
    const double d = traj::point_segment_distance(p, a, b);
    EXPECT_LE(d, std::min((p - a).norm(), (p - b).norm()) + 1e-15);
    EXPECT_GE(d, 0.0);
  }
}

TEST(DirectedHausdorff, SelfDistanceIsZero) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Trajectory t = testing::random_walk(rng, 2 + rng.uniform_index(20), 1 + rng.uniform_index(3));
    EXPECT_EQ(traj::directed_hausdorff(t, t), 0.0);
  }
}

TEST(DirectedHausdorff, MiddlePointAboveChord) {
  EXPECT_DOUBLE_EQ(traj::directed_hausdorff(make_traj({{0, 0}, {1, 1}, {2, 0}}), make_traj({{0, 0}, {2, 0}})),
                   1.0);
}

TEST(DirectedHausdorff, IsNotSymmetric) {
  const Trajectory a = make_traj({{0, 0}, {1, 1}, {2, 0}});
  const Trajectory b = make_traj({{0, 0}, {2, 0}});
  EXPECT_DOUBLE_EQ(traj::directed_hausdorff(a, b), 1.0);
  EXPECT_DOUBLE_EQ(traj::directed_hausdorff(b, a), 0.0);
}

TEST(DirectedHausdorff, MatchesNaiveOracle) {
  Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    const std::size_t d = 1 + rng.uniform_index(3);
    const Trajectory raw = testing::random_walk(rng, 2 + rng.uniform_index(11), d);
    const Trajectory poly = testing::random_walk(rng, 1 + rng.uniform_index(5) + 1, d);
    EXPECT_NEAR(traj::directed_hausdorff(raw, poly),
                testing::naive_directed_hausdorff(raw.points(), poly.points()), 1e-12);
  }
}

TEST(DirectedHausdorff, SingleVertexPolylineIsPointDistance) {
  const std::vector<traj::Point> raw{point_of({0, 0}), point_of({3, 4})};
  const std::vector<traj::Point> poly{point_of({0, 0})};
  EXPECT_DOUBLE_EQ(traj::directed_hausdorff(raw, poly), 5.0);
}

TEST(DirectedHausdorff, AddingVerticesNeverIncreases) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Trajectory raw = testing::random_walk(rng, 12, 2);
    std::vector<traj::Point> poly{raw.point(0), raw.point(11)};
    double prev = traj::directed_hausdorff(raw.points(), poly);
    for (int k = 0; k < 4; ++k) {
      const traj::Point extra = testing::point_of({rng.uniform(), rng.uniform()});
      if (rng.uniform() < 0.5) {
        poly.insert(poly.begin(), extra);
      } else {
        poly.push_back(extra);
      }
      const double next = traj::directed_hausdorff(raw.points(), poly);
      EXPECT_LE(next, prev);
      prev = next;
    }
  }
}

TEST(DirectedHausdorff, DimensionMismatchThrows) {
  EXPECT_THROW(traj::directed_hausdorff(make_traj({{0, 0}, {1, 1}}), make_traj({{0, 0, 0}, {1, 1, 1}})),
               ContractViolation);
}

TEST(Trajectory, RejectsInvalidConstruction) {
  EXPECT_THROW(make_traj({{0, 0}}), ContractViolation);
  EXPECT_THROW(Trajectory({point_of({0}), point_of({1})}, {0.0, 0.0}), ContractViolation);
  EXPECT_THROW(Trajectory({point_of({0}), point_of({1})}, {-1.0, 0.0}), ContractViolation);
  EXPECT_THROW(Trajectory({point_of({0}), point_of({1, 2})}, {0.0, 1.0}), ContractViolation);
  EXPECT_THROW(Trajectory({point_of({0}), point_of({NAN})}, {0.0, 1.0}), ContractViolation);
}

TEST(ReconstructLinear, AllIndicesIsIdentity) {
  const Trajectory src = make_traj({{0, 0}, {1, 2}, {3, 1}, {4, 4}});
  const std::vector<std::size_t> all{0, 1, 2, 3};
  const Trajectory rec = traj::reconstruct_linear(all, src);
  EXPECT_EQ(rec.points(), src.points());
  EXPECT_EQ(rec.timestamps(), src.timestamps());
}

TEST(ReconstructLinear, CollinearMidpoint) {
  const Trajectory src = make_traj({{0, 0}, {1, 0}, {2, 0}});
  const std::vector<std::size_t> ends{0, 2};
  const traj::Point p = traj::reconstruct_linear(ends, src).evaluate(src.timestamp(1));
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
}

TEST(ReconstructLinear, PeakErrorMatchesHausdorff) {
  const Trajectory src = make_traj({{0, 0}, {1, 1}, {2, 0}});
  const std::vector<std::size_t> ends{0, 2};
  const Trajectory rec = traj::reconstruct_linear(ends, src);
  const traj::Point p = rec.evaluate(src.timestamp(1));
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
  EXPECT_DOUBLE_EQ(traj::directed_hausdorff(src, rec), 1.0);
}

TEST(ReconstructLinear, RejectsBadIndices) {
  const Trajectory src = make_traj({{0, 0}, {1, 1}, {2, 0}});
  const std::vector<std::size_t> unsorted{0, 2, 1};
  const std::vector<std::size_t> out_of_range{0, 3};
  const std::vector<std::size_t> missing_end{0, 1};
  EXPECT_THROW(traj::reconstruct_linear(unsorted, src), ContractViolation);
  EXPECT_THROW(traj::reconstruct_linear(out_of_range, src), ContractViolation);
  EXPECT_THROW(traj::reconstruct_linear(missing_end, src), ContractViolation);
}

}  // namespace
}  // namespace intent_assist
