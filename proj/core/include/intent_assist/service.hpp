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

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "intent_assist/policy.hpp"
#include "intent_assist/simenv.hpp"

namespace intent_assist::service {

inline constexpr int kSchemaVersion = 1;

struct ServiceConfig {
  std::string task_id = "transfer";
  double eta = 0.05;
  std::uint64_t default_seed = 0;
  std::size_t horizon = 8;  // chunk length of the expert fallback
};

struct Response {
  int status = 200;
  std::string body;  // JSON; always carries "schema_version"
};

// Request handlers of the teleoperation backend. Sessions are keyed by an
// opaque id; each holds the active layout and nothing else.
//
//   GET  /api/task                      -> {task_id, seed, bounds, agent, grasp, objects, targets}
//   POST /api/reset {seed?}             -> same as /api/task
//   POST /api/demo  {points: [[x, y, g?], ...], dt?}
//        -> {keyframes, states, success, operator_steps, rollout_steps}
//
// Without a model the rollout is driven by the scripted expert.
class Service {
 public:
  Service(ServiceConfig config, std::optional<policy::PolicyModel> model);

  Response get_task(const std::string& session_id);
  Response post_reset(const std::string& session_id, const std::string& body);
  Response post_demo(const std::string& session_id, const std::string& body);

  // Blocks serving HTTP. Session id comes from the X-Session-Id header,
  // falling back to the "session" query parameter, then "default".
  void listen(const std::string& host, int port);

 private:
  struct Session {
    std::uint64_t seed = 0;
    sim::WorldState state;
  };

  Session& session_locked(const std::string& session_id);
  std::string layout_json(const std::string& session_id, const Session& session) const;

  ServiceConfig config_;
  sim::Task task_;
  std::optional<policy::PolicyModel> model_;
  std::mutex mutex_;
  std::map<std::string, Session> sessions_;
  std::uint64_t next_seed_;
  std::uint64_t request_counter_ = 0;
};

}  // namespace intent_assist::service
