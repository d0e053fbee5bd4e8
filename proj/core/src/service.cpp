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

#include "intent_assist/service.hpp"

#include <cmath>
#include <cstdio>

#include "httplib.h"
#include "intent_assist/error.hpp"
#include "intent_assist/experiment.hpp"
#include "intent_assist/rng.hpp"
#include "json.hpp"

namespace intent_assist::service {

using nlohmann::json;

namespace {

json vec2(const sim::Vec2& v) { return json::array({v.x(), v.y()}); }

json state_json(const sim::WorldState& s) {
  json objects = json::array();
  for (const sim::ObjectState& o : s.objects) {
    objects.push_back({{"position", vec2(o.position)}, {"held", o.held}});
  }
  return {{"agent", vec2(s.agent)}, {"grasp", s.grasp}, {"objects", objects}};
}

Response reply(int status, json body) {
  body["schema_version"] = kSchemaVersion;
  return {status, body.dump()};
}

Response field_error(int status, const std::string& field, const std::string& message) {
  return reply(status, {{"error", {{"field", field}, {"message", message}}}});
}

std::string trace_id(std::uint64_t counter) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(mix64(counter ^ 0x7472616365ULL)));
  return buf;
}

}  // namespace

Service::Service(ServiceConfig config, std::optional<policy::PolicyModel> model)
    : config_(std::move(config)),
      task_(sim::make_task(config_.task_id)),
      model_(std::move(model)),
      next_seed_(config_.default_seed) {
  if (!(config_.eta > 0.0)) throw ContractViolation("service eta must be > 0");
  if (model_ && model_->spec().scene_dim != eval::scene_dim(task_)) {
    throw ShapeMismatch("model scene width does not match task '" + task_.task_id + "'");
  }
}

Service::Session& Service::session_locked(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    Session s;
    s.seed = config_.default_seed;
    s.state = sim::reset(task_, s.seed);
    it = sessions_.emplace(session_id, std::move(s)).first;
  }
  return it->second;
}

std::string Service::layout_json(const std::string& session_id, const Session& session) const {
  const sim::WorldState& s = session.state;
  json targets = json::array();
  for (const sim::TargetZone& t : s.targets) {
    targets.push_back({{"position", vec2(t.position)}, {"radius", t.radius}});
  }
  json j = state_json(s);
  j["session_id"] = session_id;
  j["task_id"] = task_.task_id;
  j["seed"] = session.seed;
  j["bounds"] = {{"lo", vec2(s.bounds.lo)}, {"hi", vec2(s.bounds.hi)}};
  j["targets"] = targets;
  j["schema_version"] = kSchemaVersion;
  return j.dump();
}

Response Service::get_task(const std::string& session_id) {
  std::lock_guard<std::mutex> lock(mutex_);
  return {200, layout_json(session_id, session_locked(session_id))};
}

Response Service::post_reset(const std::string& session_id, const std::string& body) {
  std::optional<std::uint64_t> seed;
  if (!body.empty()) {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::parse_error&) {
      return field_error(400, "body", "body is not valid JSON");
    }
    if (!j.is_object()) return field_error(400, "body", "body must be an object");
    if (j.contains("seed") && !j.at("seed").is_null()) {
      if (!j.at("seed").is_number_unsigned()) {
        return field_error(400, "seed", "seed must be a non-negative integer");
      }
      seed = j.at("seed").get<std::uint64_t>();
    }
  }
  std::lock_guard<std::mutex> lock(mutex_);
  Session s;
  s.seed = seed ? *seed : next_seed_++;
  try {
    s.state = sim::reset(task_, s.seed);
  } catch (const LayoutError& e) {
    return field_error(422, "seed", e.what());
  }
  Session& slot = sessions_[session_id];
  slot = std::move(s);
  return {200, layout_json(session_id, slot)};
}

Response Service::post_demo(const std::string& session_id, const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error&) {
    return field_error(400, "body", "body is not valid JSON");
  }
  if (!j.is_object()) return field_error(400, "body", "body must be an object");
  if (!j.contains("points")) return field_error(400, "points", "missing field");
  const json& pts = j.at("points");
  if (!pts.is_array()) return field_error(400, "points", "points must be an array");
  if (pts.size() < 2) return field_error(422, "points", "trajectory needs ≥ 2 points");
  double dt = task_.dt;
  if (j.contains("dt")) {
    if (!j.at("dt").is_number() || !(j.at("dt").get<double>() > 0.0)) {
      return field_error(400, "dt", "dt must be a positive number");
    }
    dt = j.at("dt").get<double>();
  }
  std::vector<traj::Point> points;
  points.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const json& p = pts[i];
    const std::string field = "points[" + std::to_string(i) + "]";
    if (!p.is_array() || (p.size() != 2 && p.size() != 3)) {
      return field_error(400, field, "each point is [x, y] or [x, y, grasp]");
    }
    traj::Point q(3);
    q[2] = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (!p[k].is_number() || !std::isfinite(p[k].get<double>())) {
        return field_error(400, field, "coordinates must be finite numbers");
      }
      q[static_cast<Eigen::Index>(k)] = p[k].get<double>();
    }
    points.push_back(q);
  }

  Session session;
  std::uint64_t request = 0;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    session = session_locked(session_id);
    request = request_counter_++;
  }

  try {
    const traj::Trajectory demo =
        traj::Trajectory::with_uniform_time(std::move(points), dt, task_.task_id);
    const policy::IntentEncoder encoder =
        model_ ? model_->spec().intent
               : eval::make_model_spec(task_, eval::PipelineConfig{}).intent;
    const eval::IntentResult intent = eval::infer_intent(demo, config_.eta, encoder);
    std::unique_ptr<eval::Controller> controller;
    if (model_) {
      controller = std::make_unique<eval::PolicyController>(*model_, task_.task_id,
                                                            intent.embedding);
    } else {
      controller = std::make_unique<eval::ExpertController>(task_, config_.horizon);
    }
    const eval::Rollout ro =
        eval::rollout(*controller, task_, session.state, eval::step_cap_for(task_, session.seed),
                      derive_seed(session.seed, "serve"));

    json keyframes = json::array();
    for (const std::size_t idx : intent.keyframes.indices) {
      const traj::Point& p = demo.point(idx);
      keyframes.push_back(json::array({p[0], p[1], p[2]}));
    }
    json states = json::array();
    for (const sim::WorldState& s : ro.states) states.push_back(state_json(s));
    return reply(200, {{"session_id", session_id},
                       {"keyframes", keyframes},
                       {"states", states},
                       {"success", ro.success},
                       {"operator_steps", demo.size() - 1},
                       {"rollout_steps", ro.actions.size()}});
  } catch (const std::exception& e) {
    return reply(500, {{"error", {{"field", nullptr}, {"message", e.what()}}},
                       {"trace_id", trace_id(request)}});
  }
}

void Service::listen(const std::string& host, int port) {
  httplib::Server server;
  const auto session_of = [](const httplib::Request& req) {
    if (req.has_header("X-Session-Id")) return req.get_header_value("X-Session-Id");
    if (req.has_param("session")) return req.get_param_value("session");
    return std::string("default");
  };
  const auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Get("/api/task", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, get_task(session_of(req)));
  });
  server.Post("/api/reset", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, post_reset(session_of(req), req.body));
  });
  server.Post("/api/demo", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, post_demo(session_of(req), req.body));
  });
  if (!server.listen(host, port)) {
    throw Error("cannot listen on " + host + ":" + std::to_string(port));
  }
}

}  // namespace intent_assist::service
