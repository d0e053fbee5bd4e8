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

#include <filesystem>

#include "intent_assist/checkpoint.hpp"
#include "intent_assist/error.hpp"
#include "json.hpp"

namespace intent_assist {
namespace {

using namespace policy;

ModelSpec spec_with(std::size_t horizon, std::size_t slots) {
  ModelSpec spec;
  spec.task_ids = {"transfer"};
  spec.proprio_dim = 4;
  spec.scene_dim = 10;
  spec.horizon = horizon;
  spec.intent.slots = slots;
  spec.intent.bounds = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 1)};
  spec.action_bounds = {Eigen::Vector3d(-0.05, -0.05, 0), Eigen::Vector3d(0.05, 0.05, 1)};
  spec.training.hidden = {16, 8};
  return spec;
}

PolicyModel model_with(const ModelSpec& spec, std::uint64_t seed) {
  return PolicyModel(spec, VectorFieldNet(spec.chunk_dim(), spec.context_dim(), spec.training.hidden, seed));
}

TEST(Checkpoint, RoundTripIsExact) {
  const ModelSpec spec = spec_with(4, 8);
  const PolicyModel model = model_with(spec, 3);
  const std::string text = checkpoint_to_string(model, {3.5, 1.25});
  const PolicyModel back = checkpoint_from_string(text, &spec);
  EXPECT_EQ(back.net().parameters(), model.net().parameters());
  EXPECT_EQ(back.spec().horizon, 4u);
  EXPECT_EQ(back.spec().intent.slots, 8u);
  EXPECT_EQ(back.spec().task_ids, spec.task_ids);
  EXPECT_EQ(checkpoint_to_string(back, {3.5, 1.25}), text);
}

TEST(Checkpoint, FileRoundTrip) {
  const ModelSpec spec = spec_with(2, 4);
  const PolicyModel model = model_with(spec, 4);
  const auto path = std::filesystem::temp_directory_path() / "intent_assist_ckpt_test.json";
  save_checkpoint(path, model);
  EXPECT_EQ(load_checkpoint(path).net().parameters(), model.net().parameters());
  std::filesystem::remove(path);
}

TEST(Checkpoint, SpecMismatchListsEveryDifference) {
  const ModelSpec stored = spec_with(4, 8);
  const ModelSpec wanted = spec_with(8, 16);
  const std::string text = checkpoint_to_string(model_with(stored, 1));
  try {
    checkpoint_from_string(text, &wanted);
    FAIL() << "expected ShapeMismatch";
  } catch (const ShapeMismatch& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("horizon: expected 8, found 4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("slots: expected 16, found 8"), std::string::npos) << msg;
  }
}

TEST(Checkpoint, LayerShapeMismatchIsRejected) {
  const ModelSpec spec = spec_with(4, 8);
  nlohmann::json j = nlohmann::json::parse(checkpoint_to_string(model_with(spec, 1)));
  j["layers"][1]["shape"][0] = 9;
  EXPECT_THROW(checkpoint_from_string(j.dump()), ShapeMismatch);
}

TEST(Checkpoint, VersionMismatchIsRejected) {
  const ModelSpec spec = spec_with(4, 8);
  nlohmann::json j = nlohmann::json::parse(checkpoint_to_string(model_with(spec, 1)));
  j["version"] = kCheckpointVersion + 1;
  EXPECT_THROW(checkpoint_from_string(j.dump()), ShapeMismatch);
}

}  // namespace
}  // namespace intent_assist
