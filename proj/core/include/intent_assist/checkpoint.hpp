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
#include <string>
#include <vector>

#include "intent_assist/policy.hpp"

namespace intent_assist::policy {

inline constexpr int kCheckpointVersion = 1;

// JSON checkpoint holding the model spec (K, H, normalization bounds, task
// list), the training config, every layer's shape and parameters, and the
// training loss history. Doubles are written with round-trip precision.
std::string checkpoint_to_string(const PolicyModel& model,
                                 const std::vector<double>& loss_history = {});

// Rejects version or shape mismatches with ShapeMismatch; the message lists
// every differing entry as "<what>: expected <a>, found <b>". When `expected`
// is given, the stored spec must agree with it on all network-shaping fields.
PolicyModel checkpoint_from_string(const std::string& text,
                                   const ModelSpec* expected = nullptr);

void save_checkpoint(const std::filesystem::path& path, const PolicyModel& model,
                     const std::vector<double>& loss_history = {});
PolicyModel load_checkpoint(const std::filesystem::path& path,
                            const ModelSpec* expected = nullptr);

}  // namespace intent_assist::policy
