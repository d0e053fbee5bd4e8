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

#include "intent_assist/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "intent_assist/error.hpp"
#include "json.hpp"

namespace intent_assist::policy {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "intent-assist-checkpoint";

json vec_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd json_vec(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json box_json(const BoxNormalizer& b) { return {{"lo", vec_json(b.lo)}, {"hi", vec_json(b.hi)}}; }

BoxNormalizer json_box(const json& j) { return {json_vec(j.at("lo")), json_vec(j.at("hi"))}; }

std::string shape_str(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <typename T>
void diff(std::vector<std::string>& out, const std::string& what, const T& expected,
          const T& found) {
  if (!(expected == found)) {
    std::ostringstream line;
    line << what << ": expected " << json(expected).dump() << ", found " << json(found).dump();
    out.push_back(line.str());
  }
}

ModelSpec parse_spec(const json& root) {
  const json& s = root.at("spec");
  ModelSpec spec;
  spec.task_ids = s.at("task_ids").get<std::vector<std::string>>();
  spec.proprio_dim = s.at("proprio_dim").get<std::size_t>();
  spec.scene_dim = s.at("scene_dim").get<std::size_t>();
  spec.horizon = s.at("horizon").get<std::size_t>();
  spec.flow_steps = s.at("flow_steps").get<std::size_t>();
  spec.intent.slots = s.at("slots").get<std::size_t>();
  spec.intent.bounds = json_box(s.at("point_bounds"));
  spec.action_bounds = json_box(s.at("action_bounds"));
  const json& t = root.at("training");
  spec.training.epochs = t.at("epochs").get<std::size_t>();
  spec.training.batch_size = t.at("batch_size").get<std::size_t>();
  spec.training.optimizer = t.value("optimizer", spec.training.optimizer);
  spec.training.learning_rate = t.at("learning_rate").get<double>();
  spec.training.momentum = t.at("momentum").get<double>();
  spec.training.grad_clip = t.at("grad_clip").get<double>();
  spec.training.seed = t.at("seed").get<std::uint64_t>();
  spec.training.hidden = t.at("hidden").get<std::vector<std::size_t>>();
  return spec;
}

}  // namespace

std::string checkpoint_to_string(const PolicyModel& model,
                                 const std::vector<double>& loss_history) {
  const ModelSpec& spec = model.spec();
  json root;
  root["format"] = kFormat;
  root["version"] = kCheckpointVersion;
  root["spec"] = {
      {"task_ids", spec.task_ids},
      {"proprio_dim", spec.proprio_dim},
      {"scene_dim", spec.scene_dim},
      {"horizon", spec.horizon},
      {"flow_steps", spec.flow_steps},
      {"slots", spec.intent.slots},
      {"point_bounds", box_json(spec.intent.bounds)},
      {"action_bounds", box_json(spec.action_bounds)},
  };
  root["training"] = {
      {"epochs", spec.training.epochs},
      {"batch_size", spec.training.batch_size},
      {"optimizer", spec.training.optimizer},
      {"learning_rate", spec.training.learning_rate},
      {"momentum", spec.training.momentum},
      {"grad_clip", spec.training.grad_clip},
      {"seed", spec.training.seed},
      {"hidden", model.net().hidden_widths()},
  };
  json layers = json::array();
  for (const DenseLayer& l : model.net().layers()) {
    const Eigen::VectorXd w = l.weight.reshaped();
    layers.push_back({{"shape", {l.weight.rows(), l.weight.cols()}},
                      {"weight", vec_json(w)},
                      {"bias", vec_json(l.bias)}});
  }
  root["layers"] = std::move(layers);
  root["loss_history"] = loss_history;
  return root.dump();
}

PolicyModel checkpoint_from_string(const std::string& text, const ModelSpec* expected) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what(), 0);
  }
  if (root.value("format", std::string{}) != kFormat) {
    throw FormatError("not an intent-assist checkpoint", 0);
  }
  if (root.value("version", -1) != kCheckpointVersion) {
    throw ShapeMismatch("checkpoint version: expected " + std::to_string(kCheckpointVersion) +
                        ", found " + root.value("version", json(nullptr)).dump());
  }
  ModelSpec spec;
  try {
    spec = parse_spec(root);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint spec: ") + e.what(), 0);
  }

  std::vector<std::string> problems;
  if (expected) {
    diff(problems, "task_ids", expected->task_ids, spec.task_ids);
    diff(problems, "proprio_dim", expected->proprio_dim, spec.proprio_dim);
    diff(problems, "scene_dim", expected->scene_dim, spec.scene_dim);
    diff(problems, "horizon", expected->horizon, spec.horizon);
    diff(problems, "slots", expected->intent.slots, spec.intent.slots);
    diff(problems, "point_dim", expected->intent.point_dim(), spec.intent.point_dim());
    diff(problems, "action_dim", expected->action_dim(), spec.action_dim());
    diff(problems, "hidden", expected->training.hidden, spec.training.hidden);
  }

  // Expected layer chain implied by the stored spec.
  std::vector<std::size_t> widths{1 + spec.chunk_dim() + spec.context_dim()};
  widths.insert(widths.end(), spec.training.hidden.begin(), spec.training.hidden.end());
  widths.push_back(spec.chunk_dim());

  const json& layers_json = root.at("layers");
  diff(problems, "layer count", widths.size() - 1, layers_json.size());
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l < layers_json.size(); ++l) {
    const json& lj = layers_json[l];
    const auto shape = lj.at("shape").get<std::vector<Eigen::Index>>();
    const Eigen::VectorXd w = json_vec(lj.at("weight"));
    const Eigen::VectorXd b = json_vec(lj.at("bias"));
    if (shape.size() != 2 || w.size() != shape[0] * shape[1] || b.size() != shape[0]) {
      problems.push_back("layer " + std::to_string(l) + ": stored arrays disagree with shape");
      continue;
    }
    if (l + 1 < widths.size()) {
      const auto er = static_cast<Eigen::Index>(widths[l + 1]);
      const auto ec = static_cast<Eigen::Index>(widths[l]);
      if (shape[0] != er || shape[1] != ec) {
        problems.push_back("layer " + std::to_string(l) + " weight: expected " +
                           shape_str(er, ec) + ", found " + shape_str(shape[0], shape[1]));
      }
    }
    DenseLayer layer{Eigen::MatrixXd(shape[0], shape[1]), b};
    layer.weight.reshaped() = w;
    layers.push_back(std::move(layer));
  }
  if (!problems.empty()) {
    std::string message = "checkpoint shape mismatch:";
    for (const std::string& p : problems) message += "\n  " + p;
    throw ShapeMismatch(message);
  }
  VectorFieldNet net(spec.chunk_dim(), spec.context_dim(), std::move(layers));
  return PolicyModel(std::move(spec), std::move(net));
}

void save_checkpoint(const std::filesystem::path& path, const PolicyModel& model,
                     const std::vector<double>& loss_history) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string(), 0);
  out << checkpoint_to_string(model, loss_history) << '\n';
}

PolicyModel load_checkpoint(const std::filesystem::path& path, const ModelSpec* expected) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string(), 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return checkpoint_from_string(buffer.str(), expected);
}

}  // namespace intent_assist::policy
