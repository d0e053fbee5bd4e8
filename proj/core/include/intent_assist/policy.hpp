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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "intent_assist/keyframe.hpp"
#include "intent_assist/trajectory.hpp"

namespace intent_assist::policy {

// Affine map of the box [lo, hi] onto [-1, 1] per coordinate.
struct BoxNormalizer {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  std::size_t dim() const { return static_cast<std::size_t>(lo.size()); }
  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const;
  Eigen::VectorXd denormalize(const Eigen::VectorXd& y) const;
};

// ---------------------------------------------------------------------------
// Intent encoding

// Fixed-slot keyframe encoding: `slots` groups of (point_dim normalized
// coordinates, validity flag). Unused slots are all zero.
struct IntentEmbedding {
  Eigen::VectorXd vector;
  std::size_t n_keyframes = 0;
};

struct IntentEncoder {
  std::size_t slots = 16;
  BoxNormalizer bounds;  // point-space bounds, dim == point dimension

  std::size_t point_dim() const { return bounds.dim(); }
  std::size_t width() const { return slots * (point_dim() + 1); }
};

// Uniform subsample of n items down to k, keeping both endpoints:
// index_i = round(i * (n - 1) / (k - 1)). Returns 0..n-1 when n <= k.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k);

IntentEmbedding encode_intent(const keyframe::KeyframeSet& keyframes,
                              const traj::Trajectory& source,
                              const IntentEncoder& encoder);

// ---------------------------------------------------------------------------
// Conditioning inputs and outputs

struct Observation {
  Eigen::VectorXd proprio;  // normalized agent pose and gripper state
  Eigen::VectorXd scene;    // normalized object and target positions
  std::string task_id;
};

// H consecutive actions, one per row, in environment units.
struct ActionChunk {
  Eigen::MatrixXd actions;

  std::size_t horizon() const { return static_cast<std::size_t>(actions.rows()); }
};

// (1 - tau) * eps + tau * target. tau must lie in [0, 1].
Eigen::VectorXd interpolate_action(const Eigen::VectorXd& target,
                                   const Eigen::VectorXd& eps, double tau);

// ---------------------------------------------------------------------------
// Vector-field network

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

// Feed-forward map (tau, noisy chunk, context) -> velocity. Hidden layers use
// SiLU; the output layer is linear. Input layout is [tau, chunk, context].
class VectorFieldNet {
 public:
  VectorFieldNet(std::size_t chunk_dim, std::size_t context_dim,
                 const std::vector<std::size_t>& hidden, std::uint64_t seed);

  // Throws ShapeMismatch if the layers do not chain from 1 + chunk_dim +
  // context_dim inputs to chunk_dim outputs.
  VectorFieldNet(std::size_t chunk_dim, std::size_t context_dim,
                 std::vector<DenseLayer> layers);

  std::size_t chunk_dim() const { return chunk_dim_; }
  std::size_t context_dim() const { return context_dim_; }
  std::size_t input_dim() const { return 1 + chunk_dim_ + context_dim_; }
  std::vector<std::size_t> hidden_widths() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  std::size_t parameter_count() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

  // Columns are samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;

  Eigen::VectorXd velocity(double tau, const Eigen::VectorXd& noisy,
                           const Eigen::VectorXd& context) const;

  // Gradient of sum_j <upstream_j, out_j> with respect to the flat
  // parameters, where out = forward(inputs).
  Eigen::VectorXd backward(const Eigen::MatrixXd& inputs,
                           const Eigen::MatrixXd& upstream) const;

  // Forward and backward in one pass. Fills `outputs`; `upstream_fn` maps the
  // outputs to dL/d(outputs).
  template <typename UpstreamFn>
  Eigen::VectorXd forward_backward(const Eigen::MatrixXd& inputs,
                                   Eigen::MatrixXd& outputs,
                                   UpstreamFn&& upstream_fn) const;

 private:
  struct Tape {
    std::vector<Eigen::MatrixXd> activations;  // input to each layer
    std::vector<Eigen::MatrixXd> pre;          // pre-activation of hidden layers
  };
  Eigen::MatrixXd run(const Eigen::MatrixXd& inputs, Tape* tape) const;
  Eigen::VectorXd gradient(const Tape& tape, Eigen::MatrixXd upstream) const;

  std::size_t chunk_dim_;
  std::size_t context_dim_;
  std::vector<DenseLayer> layers_;
};

template <typename UpstreamFn>
Eigen::VectorXd VectorFieldNet::forward_backward(const Eigen::MatrixXd& inputs,
                                                 Eigen::MatrixXd& outputs,
                                                 UpstreamFn&& upstream_fn) const {
  Tape tape;
  outputs = run(inputs, &tape);
  return gradient(tape, upstream_fn(outputs));
}

// ---------------------------------------------------------------------------
// Conditional flow matching

struct TrainingSample {
  Eigen::VectorXd context;
  Eigen::VectorXd target;  // normalized action chunk
};

struct FlowDraw {
  double tau = 0.0;
  Eigen::VectorXd eps;
};

// tau ~ U[0,1] and eps ~ N(0, I) for one sample. The draw is keyed by the
// sample's contents and `seed`, so identical samples in a batch receive
// identical draws.
FlowDraw draw_for(const TrainingSample& sample, std::uint64_t seed);

struct LossAndGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

// Batch mean of ||net(tau, a_tau, C) - (a - eps)||^2 and its exact gradient.
// Throws NumericFault carrying the first offending batch index.
LossAndGrad cfm_loss_and_grad(const VectorFieldNet& net,
                              std::span<const TrainingSample> batch,
                              std::span<const FlowDraw> draws);
LossAndGrad cfm_loss_and_grad(const VectorFieldNet& net,
                              std::span<const TrainingSample> batch,
                              std::uint64_t seed);
double cfm_loss(const VectorFieldNet& net, std::span<const TrainingSample> batch,
                std::span<const FlowDraw> draws);

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  std::string optimizer = "adam";  // "adam" or "sgd"
  double learning_rate = 1e-3;
  double momentum = 0.0;           // sgd only
  double grad_clip = 0.0;  // max global gradient norm; 0 disables
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden{128, 128, 128};
};

struct TrainResult {
  VectorFieldNet net;
  std::vector<double> loss_history;  // mean batch loss per completed epoch
  std::optional<std::string> fault;  // set when training stopped early
};

// Minibatch SGD (optionally with momentum) over shuffled data. Fully
// deterministic given config.seed. On a numeric fault the parameters from
// the last completed epoch are returned together with the fault message.
TrainResult train(std::span<const TrainingSample> dataset, const TrainConfig& config,
                  std::optional<VectorFieldNet> initial = std::nullopt);

// Euler integration of the field from `start` at tau = 0 to tau = 1 with
// n_steps uniform steps.
Eigen::VectorXd integrate_flow(const VectorFieldNet& net, Eigen::VectorXd start,
                               const Eigen::VectorXd& context, std::size_t n_steps);

// integrate_flow from eps ~ N(0, I). Returns the normalized chunk.
Eigen::VectorXd infer_chunk(const VectorFieldNet& net, const Eigen::VectorXd& context,
                            std::size_t n_steps, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Model bundle

struct ModelSpec {
  std::vector<std::string> task_ids;  // one-hot order in the context
  std::size_t proprio_dim = 0;
  std::size_t scene_dim = 0;
  std::size_t horizon = 8;
  std::size_t flow_steps = 10;
  IntentEncoder intent;
  BoxNormalizer action_bounds;  // per action coordinate
  TrainConfig training;

  std::size_t action_dim() const { return action_bounds.dim(); }
  std::size_t chunk_dim() const { return horizon * action_dim(); }
  std::size_t context_dim() const {
    return task_ids.size() + proprio_dim + scene_dim + intent.width();
  }
};

// [task one-hot, proprio, scene, intent].
Eigen::VectorXd build_context(const ModelSpec& spec, const Observation& obs,
                              const IntentEmbedding& intent);

// Flattens a chunk row-major over steps, each action mapped into [-1, 1].
Eigen::VectorXd normalize_chunk(const ModelSpec& spec, const ActionChunk& chunk);
ActionChunk denormalize_chunk(const ModelSpec& spec, const Eigen::VectorXd& flat);

class PolicyModel {
 public:
  PolicyModel(ModelSpec spec, VectorFieldNet net);

  const ModelSpec& spec() const { return spec_; }
  const VectorFieldNet& net() const { return net_; }

  Eigen::VectorXd context(const Observation& obs, const IntentEmbedding& intent) const {
    return build_context(spec_, obs, intent);
  }

  ActionChunk act(const Observation& obs, const IntentEmbedding& intent,
                  std::uint64_t seed) const;

 private:
  ModelSpec spec_;
  VectorFieldNet net_;
};

}  // namespace intent_assist::policy
