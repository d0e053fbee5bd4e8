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

#include "intent_assist/service.hpp"
#include "intent_assist/simenv.hpp"
#include "json.hpp"

namespace intent_assist {
namespace {

using nlohmann::json;
using service::Service;

json body_of(const service::Response& r) {
  const json j = json::parse(r.body);
  EXPECT_EQ(j.at("schema_version"), service::kSchemaVersion);
  return j;
}

std::string points_json(const traj::Trajectory& t) {
  json pts = json::array();
  for (const auto& p : t.points()) pts.push_back({p[0], p[1], p[2]});
  return json{{"points", pts}}.dump();
}

TEST(Service, ResetSameSeedGivesSameLayout) {
  Service svc({}, std::nullopt);
  const auto a = svc.post_reset("s", R"({"seed": 7})");
  const json first = body_of(svc.get_task("s"));
  const auto b = svc.post_reset("s", R"({"seed": 7})");
  const json second = body_of(svc.get_task("s"));
  EXPECT_EQ(a.status, 200);
  EXPECT_EQ(b.body, a.body);
  EXPECT_EQ(first, second);
  EXPECT_EQ(first.at("seed"), 7);
  EXPECT_FALSE(first.contains("goals"));
}

TEST(Service, ServerChoosesSeedWhenMissing) {
  Service svc({}, std::nullopt);
  const json a = body_of(svc.post_reset("s", "{}"));
  const json b = body_of(svc.post_reset("s", ""));
  EXPECT_NE(a.at("seed"), b.at("seed"));
}

TEST(Service, SessionsAreIndependent) {
  Service svc({}, std::nullopt);
  svc.post_reset("a", R"({"seed": 1})");
  svc.post_reset("b", R"({"seed": 2})");
  EXPECT_EQ(body_of(svc.get_task("a")).at("seed"), 1);
  EXPECT_EQ(body_of(svc.get_task("b")).at("seed"), 2);
}

TEST(Service, EmptyPointsRejected) {
  Service svc({}, std::nullopt);
  const auto r = svc.post_demo("s", R"({"points": []})");
  EXPECT_GE(r.status, 400);
  EXPECT_LT(r.status, 500);
  const json j = body_of(r);
  EXPECT_EQ(j.at("error").at("field"), "points");
  EXPECT_EQ(j.at("error").at("message"), "trajectory needs ≥ 2 points");
}

TEST(Service, MalformedBodiesNameTheField) {
  Service svc({}, std::nullopt);
  EXPECT_EQ(body_of(svc.post_demo("s", "not json")).at("error").at("field"), "body");
  EXPECT_EQ(body_of(svc.post_demo("s", "{}")).at("error").at("field"), "points");
  EXPECT_EQ(body_of(svc.post_demo("s", R"({"points": [[0,0],[1]]})")).at("error").at("field"), "points[1]");
  EXPECT_EQ(body_of(svc.post_demo("s", R"({"points": [[0,0],[1,1]], "dt": -1})")).at("error").at("field"), "dt");
  EXPECT_EQ(body_of(svc.post_reset("s", R"({"seed": -3})")).at("error").at("field"), "seed");
  EXPECT_EQ(svc.post_reset("s", R"({"seed": "x"})").status, 400);
}

TEST(Service, ExpertDemoOfCurrentLayoutSucceeds) {
  Service svc({}, std::nullopt);
  svc.post_reset("s", R"({"seed": 11})");
  const sim::Task task = sim::make_task("transfer");
  const auto r = svc.post_demo("s", points_json(sim::expert_demo(task, 11)));
  ASSERT_EQ(r.status, 200) << r.body;
  const json j = body_of(r);
  EXPECT_TRUE(j.at("success").get<bool>());
  EXPECT_EQ(j.at("operator_steps"), sim::expert_demo(task, 11).size() - 1);
  EXPECT_GE(j.at("keyframes").size(), 2u);
  EXPECT_EQ(j.at("states").size(), j.at("rollout_steps").get<std::size_t>() + 1);
}

TEST(Service, TwoPointDemoStillReturnsKeyframes) {
  Service svc({}, std::nullopt);
  const auto r = svc.post_demo("s", R"({"points": [[0.1, 0.1], [0.9, 0.9]]})");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(body_of(r).at("keyframes").size(), 2u);
}

}  // namespace
}  // namespace intent_assist
