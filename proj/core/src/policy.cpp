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

#include "intent_assist/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "intent_assist/error.hpp"
#include "intent_assist/rng.hpp"

namespace intent_assist::policy {

// ---------------------------------------------------------------------------
// BoxNormalizer

Eigen::VectorXd BoxNormalizer::normalize(const Eigen::VectorXd& x) const {
  if (x.size() != lo.size()) {
    throw ContractViolation("normalize: expected dimension " + std::to_string(lo.size()) +
                            ", got " + std::to_string(x.size()));
  }
  const Eigen::ArrayXd span = (hi - lo).array();
  return (2.0 * (x - lo).array() / span - 1.0).matrix();
}

Eigen::VectorXd BoxNormalizer::denormalize(const Eigen::VectorXd& y) const {
  if (y.size() != lo.size()) {
    throw ContractViolation("denormalize: expected dimension " + std::to_string(lo.size()) +
                            ", got " + std::to_string(y.size()));
  }
  return (lo.array() + 0.5 * (y.array() + 1.0) * (hi - lo).array()).matrix();
}

// ---------------------------------------------------------------------------
// Intent encoding

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k) {
  std::vector<std::size_t> out;
  if (n <= k) {
    out.resize(n);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  if (k < 2) throw ContractViolation("subsample_indices: need k >= 2");
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double x = static_cast<double>(i) * static_cast<double>(n - 1) /
                     static_cast<double>(k - 1);
    out.push_back(static_cast<std::size_t>(std::lround(x)));
  }
  return out;
}

IntentEmbedding encode_intent(const keyframe::KeyframeSet& keyframes,
                              const traj::Trajectory& source,
                              const IntentEncoder& encoder) {
  const std::size_t d = encoder.point_dim();
  if (source.dim() != d) {
    throw ContractViolation("encode_intent: trajectory dimension " +
                            std::to_string(source.dim()) + ", encoder expects " +
                            std::to_string(d));
  }
  const std::size_t n = keyframes.indices.size();
  for (const std::size_t idx : keyframes.indices) {
    if (idx >= source.size()) {
      throw ContractViolation("encode_intent: keyframe index out of range");
    }
  }
  IntentEmbedding out;
  out.vector = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(encoder.width()));
  const std::vector<std::size_t> pick = subsample_indices(n, encoder.slots);
  for (std::size_t slot = 0; slot < pick.size(); ++slot) {
    const auto base = static_cast<Eigen::Index>(slot * (d + 1));
    out.vector.segment(base, static_cast<Eigen::Index>(d)) =
        encoder.bounds.normalize(source.point(keyframes.indices[pick[slot]]));
    out.vector[base + static_cast<Eigen::Index>(d)] = 1.0;
  }
  out.n_keyframes = pick.size();
  return out;
}

Eigen::VectorXd interpolate_action(const Eigen::VectorXd& target,
                                   const Eigen::VectorXd& eps, double tau) {
  if (target.size() != eps.size()) {
    throw ContractViolation("interpolate_action: shape mismatch");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw ContractViolation("interpolate_action: tau must lie in [0, 1]");
  }
  if (tau == 0.0) return eps;
  if (tau == 1.0) return target;
  return (1.0 - tau) * eps + tau * target;
}

// ---------------------------------------------------------------------------
// VectorFieldNet

namespace {

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) { return 1.0 / (1.0 + (-z).exp()); }

}  // namespace

VectorFieldNet::VectorFieldNet(std::size_t chunk_dim, std::size_t context_dim,
                               const std::vector<std::size_t>& hidden, std::uint64_t seed)
    : chunk_dim_(chunk_dim), context_dim_(context_dim) {
  if (chunk_dim == 0) throw ContractViolation("chunk dimension must be positive");
  Rng rng(derive_seed(seed, "init"));
  std::vector<std::size_t> widths{input_dim()};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(chunk_dim);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(widths[l]);
    const auto out = static_cast<Eigen::Index>(widths[l + 1]);
    const bool last = l + 2 == widths.size();
    const double scale = (last ? 0.1 : 1.0) / std::sqrt(static_cast<double>(in));
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (Eigen::Index c = 0; c < in; ++c) {
      for (Eigen::Index r = 0; r < out; ++r) layer.weight(r, c) = scale * rng.normal();
    }
    layers_.push_back(std::move(layer));
  }
}

VectorFieldNet::VectorFieldNet(std::size_t chunk_dim, std::size_t context_dim,
                               std::vector<DenseLayer> layers)
    : chunk_dim_(chunk_dim), context_dim_(context_dim), layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeMismatch("network has no layers");
  auto expected_in = static_cast<Eigen::Index>(input_dim());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    if (layer.weight.cols() != expected_in || layer.bias.size() != layer.weight.rows()) {
      throw ShapeMismatch("layer " + std::to_string(l) + ": expected " +
                          std::to_string(layer.bias.size()) + "x" +
                          std::to_string(expected_in) + " weights, found " +
                          std::to_string(layer.weight.rows()) + "x" +
                          std::to_string(layer.weight.cols()));
    }
    expected_in = layer.weight.rows();
  }
  if (expected_in != static_cast<Eigen::Index>(chunk_dim_)) {
    throw ShapeMismatch("output layer width " + std::to_string(expected_in) +
                        " differs from chunk dimension " + std::to_string(chunk_dim_));
  }
}

std::vector<std::size_t> VectorFieldNet::hidden_widths() const {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    out.push_back(static_cast<std::size_t>(layers_[l].weight.rows()));
  }
  return out;
}

std::size_t VectorFieldNet::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::VectorXd VectorFieldNet::parameters() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index at = 0;
  for (const DenseLayer& l : layers_) {
    flat.segment(at, l.weight.size()) = l.weight.reshaped();
    at += l.weight.size();
    flat.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return flat;
}

void VectorFieldNet::set_parameters(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
    throw ContractViolation("set_parameters: expected " + std::to_string(parameter_count()) +
                            " values, got " + std::to_string(flat.size()));
  }
  Eigen::Index at = 0;
  for (DenseLayer& l : layers_) {
    l.weight.reshaped() = flat.segment(at, l.weight.size());
    at += l.weight.size();
    l.bias = flat.segment(at, l.bias.size());
    at += l.bias.size();
  }
}

Eigen::MatrixXd VectorFieldNet::run(const Eigen::MatrixXd& inputs, Tape* tape) const {
  if (inputs.rows() != static_cast<Eigen::Index>(input_dim())) {
    throw ContractViolation("network input has " + std::to_string(inputs.rows()) +
                            " rows, expected " + std::to_string(input_dim()));
  }
  Eigen::MatrixXd h = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    Eigen::MatrixXd z = layer.weight * h;
    z.colwise() += layer.bias;
    if (tape) tape->activations.push_back(std::move(h));
    if (l + 1 == layers_.size()) return z;
    const Eigen::ArrayXXd za = z.array();
    h = (za * sigmoid(za)).matrix();
    if (tape) tape->pre.push_back(std::move(z));
  }
  return h;  // unreachable: layers_ is never empty
}

Eigen::VectorXd VectorFieldNet::gradient(const Tape& tape, Eigen::MatrixXd upstream) const {
  Eigen::VectorXd grad(static_cast<Eigen::Index>(parameter_count()));
  // Offsets of each layer's block in the flat layout.
  std::vector<Eigen::Index> offset(layers_.size());
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    offset[l] = at;
    at += layers_[l].weight.size() + layers_[l].bias.size();
  }
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const DenseLayer& layer = layers_[l];
    const Eigen::MatrixXd gw = upstream * tape.activations[l].transpose();
    grad.segment(offset[l], gw.size()) = gw.reshaped();
    grad.segment(offset[l] + gw.size(), layer.bias.size()) = upstream.rowwise().sum();
    if (l == 0) break;
    const Eigen::ArrayXXd z = tape.pre[l - 1].array();
    const Eigen::ArrayXXd s = sigmoid(z);
    const Eigen::ArrayXXd dsilu = s * (1.0 + z * (1.0 - s));
    upstream = ((layer.weight.transpose() * upstream).array() * dsilu).matrix();
  }
  return grad;
}

Eigen::MatrixXd VectorFieldNet::forward(const Eigen::MatrixXd& inputs) const {
  return run(inputs, nullptr);
}

Eigen::VectorXd VectorFieldNet::velocity(double tau, const Eigen::VectorXd& noisy,
                                         const Eigen::VectorXd& context) const {
  if (noisy.size() != static_cast<Eigen::Index>(chunk_dim_) ||
      context.size() != static_cast<Eigen::Index>(context_dim_)) {
    throw ContractViolation("velocity: input shape mismatch");
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(input_dim()));
  x << tau, noisy, context;
  return run(x, nullptr).col(0);
}

Eigen::VectorXd VectorFieldNet::backward(const Eigen::MatrixXd& inputs,
                                         const Eigen::MatrixXd& upstream) const {
  Tape tape;
  const Eigen::MatrixXd out = run(inputs, &tape);
  if (out.rows() != upstream.rows() || out.cols() != upstream.cols()) {
    throw ContractViolation("backward: upstream shape mismatch");
  }
  return gradient(tape, upstream);
}

// ---------------------------------------------------------------------------
// Conditional flow matching

namespace {

std::uint64_t content_hash(const TrainingSample& s) {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  auto absorb = [&h](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, &v[i], sizeof bits);
      h = mix64(h ^ bits);
    }
  };
  absorb(s.context);
  absorb(s.target);
  return h;
}

Eigen::MatrixXd assemble_inputs(const VectorFieldNet& net,
                                std::span<const TrainingSample> batch,
                                std::span<const FlowDraw> draws,
                                Eigen::MatrixXd& velocity_targets) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  const auto chunk = static_cast<Eigen::Index>(net.chunk_dim());
  const auto ctx = static_cast<Eigen::Index>(net.context_dim());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(net.input_dim()), b);
  velocity_targets.resize(chunk, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const TrainingSample& s = batch[static_cast<std::size_t>(j)];
    const FlowDraw& d = draws[static_cast<std::size_t>(j)];
    if (s.target.size() != chunk || s.context.size() != ctx || d.eps.size() != chunk) {
      throw ContractViolation("cfm: batch element " + std::to_string(j) + " has wrong shape");
    }
    x(0, j) = d.tau;
    x.col(j).segment(1, chunk) = interpolate_action(s.target, d.eps, d.tau);
    x.col(j).segment(1 + chunk, ctx) = s.context;
    velocity_targets.col(j) = s.target - d.eps;
  }
  return x;
}

void check_finite_columns(const Eigen::MatrixXd& m, const char* what) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (!m.col(j).allFinite()) {
      throw NumericFault(std::string("non-finite ") + what, static_cast<std::size_t>(j));
    }
  }
}

}  // namespace

FlowDraw draw_for(const TrainingSample& sample, std::uint64_t seed) {
  Rng rng(derive_seed(seed, content_hash(sample)));
  FlowDraw d;
  d.tau = rng.uniform();
  d.eps.resize(sample.target.size());
  for (Eigen::Index i = 0; i < d.eps.size(); ++i) d.eps[i] = rng.normal();
  return d;
}

LossAndGrad cfm_loss_and_grad(const VectorFieldNet& net,
                              std::span<const TrainingSample> batch,
                              std::span<const FlowDraw> draws) {
  if (batch.empty()) throw ContractViolation("cfm_loss_and_grad: empty batch");
  if (draws.size() != batch.size()) {
    throw ContractViolation("cfm_loss_and_grad: one flow draw per batch element required");
  }
  Eigen::MatrixXd v_target;
  const Eigen::MatrixXd x = assemble_inputs(net, batch, draws, v_target);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  Eigen::MatrixXd out;
  Eigen::VectorXd grad = net.forward_backward(x, out, [&](const Eigen::MatrixXd& o) {
    check_finite_columns(o, "network output");
    const Eigen::MatrixXd err = o - v_target;
    loss = err.squaredNorm() * inv_b;
    return Eigen::MatrixXd(2.0 * inv_b * err);
  });
  if (!std::isfinite(loss)) throw NumericFault("non-finite loss", 0);
  if (!grad.allFinite()) throw NumericFault("non-finite gradient", 0);
  return {loss, std::move(grad)};
}

LossAndGrad cfm_loss_and_grad(const VectorFieldNet& net,
                              std::span<const TrainingSample> batch, std::uint64_t seed) {
  std::vector<FlowDraw> draws;
  draws.reserve(batch.size());
  for (const TrainingSample& s : batch) draws.push_back(draw_for(s, seed));
  return cfm_loss_and_grad(net, batch, draws);
}

double cfm_loss(const VectorFieldNet& net, std::span<const TrainingSample> batch,
                std::span<const FlowDraw> draws) {
  if (batch.empty() || draws.size() != batch.size()) {
    throw ContractViolation("cfm_loss: batch/draw size mismatch");
  }
  Eigen::MatrixXd v_target;
  const Eigen::MatrixXd x = assemble_inputs(net, batch, draws, v_target);
  return (net.forward(x) - v_target).squaredNorm() / static_cast<double>(batch.size());
}

TrainResult train(std::span<const TrainingSample> dataset, const TrainConfig& config,
                  std::optional<VectorFieldNet> initial) {
  if (dataset.empty()) throw ContractViolation("train: empty dataset");
  if (config.epochs == 0 || config.batch_size == 0 || !(config.learning_rate >= 0.0) ||
      !(config.momentum >= 0.0 && config.momentum < 1.0) ||
      (config.optimizer != "adam" && config.optimizer != "sgd")) {
    throw ContractViolation("train: invalid configuration");
  }
  const std::size_t chunk = static_cast<std::size_t>(dataset.front().target.size());
  const std::size_t ctx = static_cast<std::size_t>(dataset.front().context.size());
  VectorFieldNet net = initial ? std::move(*initial)
                               : VectorFieldNet(chunk, ctx, config.hidden, config.seed);
  if (net.chunk_dim() != chunk || net.context_dim() != ctx) {
    throw ContractViolation("train: initial network does not match dataset shapes");
  }

  TrainResult result{net, {}, std::nullopt};
  Eigen::VectorXd params = net.parameters();
  Eigen::VectorXd last_good = params;
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd second = Eigen::VectorXd::Zero(params.size());
  const bool adam = config.optimizer == "adam";
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kAdamEps = 1e-8;
  double beta1_power = 1.0;
  double beta2_power = 1.0;

  Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainingSample> batch;
  batch.reserve(config.batch_size);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
    }
    const std::uint64_t epoch_seed = derive_seed(config.seed, epoch);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(dataset[order[k]]);
      LossAndGrad lg;
      try {
        lg = cfm_loss_and_grad(net, batch, derive_seed(epoch_seed, batches));
      } catch (const NumericFault& fault) {
        net.set_parameters(last_good);
        result.net = std::move(net);
        result.fault = "epoch " + std::to_string(epoch) + ": " + fault.what();
        return result;
      }
      if (config.grad_clip > 0.0) {
        const double norm = lg.grad.norm();
        if (norm > config.grad_clip) lg.grad *= config.grad_clip / norm;
      }
      if (adam) {
        beta1_power *= kBeta1;
        beta2_power *= kBeta2;
        velocity = kBeta1 * velocity + (1.0 - kBeta1) * lg.grad;
        second = kBeta2 * second + (1.0 - kBeta2) * lg.grad.cwiseAbs2();
        const double step = config.learning_rate * std::sqrt(1.0 - beta2_power) / (1.0 - beta1_power);
        params.array() -= step * velocity.array() / (second.array().sqrt() + kAdamEps);
      } else {
        velocity = config.momentum * velocity - config.learning_rate * lg.grad;
        params += velocity;
      }
      net.set_parameters(params);
      loss_sum += lg.loss;
      ++batches;
    }
    if (!params.allFinite()) {
      net.set_parameters(last_good);
      result.net = std::move(net);
      result.fault = "epoch " + std::to_string(epoch) + ": non-finite parameters";
      return result;
    }
    last_good = params;
    result.loss_history.push_back(loss_sum / static_cast<double>(batches));
  }
  result.net = std::move(net);
  return result;
}

Eigen::VectorXd integrate_flow(const VectorFieldNet& net, Eigen::VectorXd start,
                               const Eigen::VectorXd& context, std::size_t n_steps) {
  if (n_steps == 0) throw ContractViolation("integrate_flow: n_steps must be >= 1");
  if (start.size() != static_cast<Eigen::Index>(net.chunk_dim())) {
    throw ContractViolation("integrate_flow: start has the wrong size");
  }
  const double dt = 1.0 / static_cast<double>(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double tau = static_cast<double>(k) * dt;
    start += dt * net.velocity(tau, start, context);
    if (!start.allFinite()) throw NumericFault("non-finite flow state", k);
  }
  return start;
}

Eigen::VectorXd infer_chunk(const VectorFieldNet& net, const Eigen::VectorXd& context,
                            std::size_t n_steps, std::uint64_t seed) {
  if (n_steps == 0) throw ContractViolation("infer_chunk: n_steps must be >= 1");
  Rng rng(seed);
  Eigen::VectorXd eps(static_cast<Eigen::Index>(net.chunk_dim()));
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
  return integrate_flow(net, std::move(eps), context, n_steps);
}

// ---------------------------------------------------------------------------
// PolicyModel

PolicyModel::PolicyModel(ModelSpec spec, VectorFieldNet net)
    : spec_(std::move(spec)), net_(std::move(net)) {
  if (net_.chunk_dim() != spec_.chunk_dim() || net_.context_dim() != spec_.context_dim()) {
    throw ShapeMismatch("network shapes (chunk " + std::to_string(net_.chunk_dim()) +
                        ", context " + std::to_string(net_.context_dim()) +
                        ") differ from model spec (chunk " +
                        std::to_string(spec_.chunk_dim()) + ", context " +
                        std::to_string(spec_.context_dim()) + ")");
  }
}

Eigen::VectorXd build_context(const ModelSpec& spec, const Observation& obs,
                              const IntentEmbedding& intent) {
  const auto it = std::find(spec.task_ids.begin(), spec.task_ids.end(), obs.task_id);
  if (it == spec.task_ids.end()) {
    throw ContractViolation("model was not trained on task '" + obs.task_id + "'");
  }
  if (static_cast<std::size_t>(obs.proprio.size()) != spec.proprio_dim ||
      static_cast<std::size_t>(obs.scene.size()) != spec.scene_dim ||
      static_cast<std::size_t>(intent.vector.size()) != spec.intent.width()) {
    throw ContractViolation("observation or intent shape does not match the model");
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.context_dim()));
  c[it - spec.task_ids.begin()] = 1.0;
  Eigen::Index at = static_cast<Eigen::Index>(spec.task_ids.size());
  c.segment(at, obs.proprio.size()) = obs.proprio;
  at += obs.proprio.size();
  c.segment(at, obs.scene.size()) = obs.scene;
  at += obs.scene.size();
  c.segment(at, intent.vector.size()) = intent.vector;
  return c;
}

Eigen::VectorXd normalize_chunk(const ModelSpec& spec, const ActionChunk& chunk) {
  if (chunk.horizon() != spec.horizon ||
      static_cast<std::size_t>(chunk.actions.cols()) != spec.action_dim()) {
    throw ContractViolation("action chunk shape does not match the model");
  }
  const auto a = static_cast<Eigen::Index>(spec.action_dim());
  Eigen::VectorXd flat(static_cast<Eigen::Index>(spec.chunk_dim()));
  for (Eigen::Index h = 0; h < chunk.actions.rows(); ++h) {
    flat.segment(h * a, a) = spec.action_bounds.normalize(chunk.actions.row(h).transpose());
  }
  return flat;
}

ActionChunk denormalize_chunk(const ModelSpec& spec, const Eigen::VectorXd& flat) {
  const auto a = static_cast<Eigen::Index>(spec.action_dim());
  const auto horizon = static_cast<Eigen::Index>(spec.horizon);
  ActionChunk chunk{Eigen::MatrixXd(horizon, a)};
  for (Eigen::Index h = 0; h < horizon; ++h) {
    chunk.actions.row(h) = spec.action_bounds.denormalize(flat.segment(h * a, a)).transpose();
  }
  return chunk;
}

ActionChunk PolicyModel::act(const Observation& obs, const IntentEmbedding& intent,
                             std::uint64_t seed) const {
  return denormalize_chunk(spec_, infer_chunk(net_, context(obs, intent), spec_.flow_steps, seed));
}

}  // namespace intent_assist::policy
