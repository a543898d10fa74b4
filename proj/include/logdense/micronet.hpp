// Copyright 2026 The logdense Authors
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

// Small double-precision network executing a NetworkPlan, for gradient
// and deep-supervision checks.

#ifndef LOGDENSE_MICRONET_HPP_
#define LOGDENSE_MICRONET_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "logdense/autograd.hpp"
#include "logdense/cost_model.hpp"
#include "logdense/topology.hpp"

namespace logdense {

inline constexpr int kDeskMaxLayers = 64;
inline constexpr int kDeskMaxGrowth = 8;
inline constexpr int kDeskMaxSide = 8;

struct ParamArray {
  std::string name;  // e.g. "step12.op2.weight"
  ad::Tensor value;
};

struct MicroModel {
  Topology topo;
  NetworkPlan plan;
  std::vector<ParamArray> params;
  // op_params[s][o]: indices into params for op o of step s (weight, then
  // bias / shift), empty for parameter-free ops.
  std::vector<std::vector<std::vector<int>>> op_params;
  std::uint64_t seed = 0;

  std::int64_t num_parameters() const;
  int num_aux_heads() const { return static_cast<int>(plan.head_steps.size()) - 1; }
};

MicroModel build(const Topology& topo, const NetworkConfig& cfg, std::uint64_t seed);

struct Batch {
  ad::Tensor images;        // (n, image_channels, H, W)
  std::vector<int> labels;  // n for classifiers, n*H*W for pixelwise heads
};

// Seeded random inputs and labels shaped for `model`.
Batch synthetic_batch(const MicroModel& model, int samples, std::uint64_t seed);

struct LossSpec {
  // Final head only: auxiliary weights drop to zero.
  bool final_only = false;
};

// Head weights, auxiliary heads first and final last.
std::vector<double> loss_weights(int aux_heads, const LossSpec& spec);

struct ForwardPass {
  ad::Tape tape;
  std::vector<ad::Var> params;    // parallel to MicroModel::params
  std::vector<ad::Var> tensors;   // parallel to plan tensors
  std::vector<ad::Var> heads;     // per plan head step, auxiliary first
  std::vector<ad::Var> head_losses;
  std::optional<ad::Var> loss;
};

// Optional capture or replay of ReLU masks and max-pool winners.
struct PatternControl {
  ad::PiecewisePattern* record = nullptr;
  const ad::PiecewisePattern* replay = nullptr;
};

// Runs every plan step. Concatenation follows the plan's input order, which
// is ascending producer id.
ForwardPass forward(const MicroModel& model, const ad::Tensor& images,
                    const PatternControl& pattern = {});

// Labels for a head at `level`: the full-resolution label at the top-left
// pixel of each 2^level cell.
std::vector<int> head_labels(const MicroModel& model, const Batch& batch, int head);

ad::Var loss(ForwardPass& pass, const MicroModel& model, const Batch& batch,
             const LossSpec& spec);

// Gradient for every parameter, shaped like MicroModel::params.
std::vector<ad::Tensor> backward(ForwardPass& pass);

double loss_value(const MicroModel& model, const Batch& batch, const LossSpec& spec,
                  const PatternControl& pattern = {});
std::vector<ad::Tensor> gradients(const MicroModel& model, const Batch& batch,
                                  const LossSpec& spec);

struct GradCheckReport {
  std::string scheme;
  int num_layers = 0;
  int growth_rate = 0;
  int checked = 0;
  // Probes whose +-epsilon evaluation flipped a ReLU or max-pool choice; those
  // are re-evaluated on the piece containing the unperturbed parameters.
  int kink_crossings = 0;
  double max_rel_err = 0;
  std::string worst_param;
  bool pass = false;
};

inline constexpr double kGradCheckTolerance = 1e-4;
// Gradients below this magnitude are compared absolutely: the central
// difference itself carries about 1e-12 of round-off at epsilon 1e-4.
inline constexpr double kGradCheckFloor = 1e-8;

// Central differences on `samples` randomly chosen scalars (all of them when
// samples <= 0), compared with the analytic gradient. Relative error is
// |a - n| / max(|a|, |n|, kGradCheckFloor).
GradCheckReport grad_check(const MicroModel& model, const Batch& batch, const LossSpec& spec,
                           double epsilon = 1e-4, int samples = 200,
                           std::uint64_t seed = 0);
std::string grad_check_json(const GradCheckReport& report);

// Fewest weighted layer hops from the final layer's output back to node j's
// output through the plan: layer and compression steps cost one hop,
// transitions and stack bookkeeping cost none. nullopt when unreachable.
std::optional<int> gradient_reach(const MicroModel& model, NodeId j);

// d(final-head loss)/d(output of node j) under the final-only loss.
ad::Tensor activation_gradient(const MicroModel& model, const Batch& batch, NodeId j);

struct TrainStep {
  int step = 0;
  std::vector<double> head_losses;
  double total = 0;
};

struct TrainResult {
  std::vector<TrainStep> trajectory;
  bool diverged = false;
  int diverged_at = -1;
};

// Plain gradient descent; stops at the first non-finite loss.
TrainResult train_toy(MicroModel& model, const Batch& data, int steps, double learning_rate,
                      const LossSpec& spec = {});
std::string train_csv(const TrainResult& result);

}  // namespace logdense

#endif  // LOGDENSE_MICRONET_HPP_
