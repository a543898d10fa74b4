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

#ifndef LOGDENSE_COST_MODEL_HPP_
#define LOGDENSE_COST_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "logdense/topology.hpp"

namespace logdense {

enum class Compression { kNone, kV1IndependentTransition, kV2BlockCompression };
enum class FlopConvention { kMAC, kMACx2 };
enum class HeadKind { kClassifier, kPixelwise };

std::string compression_name(Compression c);
Compression parse_compression(const std::string& name);
std::string flop_convention_name(FlopConvention c);

struct NetworkConfig {
  int growth_rate = 12;
  bool bottleneck = false;
  int bottleneck_width = 0;  // 0 means 4 * growth_rate
  std::vector<int> block_sizes;  // empty: take the topology's
  Compression compression = Compression::kV1IndependentTransition;
  int hub_multiplier = 1;
  int input_height = 32;
  int input_width = 32;
  int image_channels = 3;
  int initial_channels = 0;  // 0 means 2 * growth_rate
  int num_classes = 10;
  FlopConvention flop_convention = FlopConvention::kMAC;
  // Unset: lazy for fully convolutional topologies, eager otherwise.
  std::optional<bool> lazy_transitions;
  // Unset: pixelwise for fully convolutional topologies, classifier otherwise.
  std::optional<HeadKind> head;
  bool deep_supervision = true;
  int transposed_kernel = 3;
  // Resolution level per block; empty: derived from the topology.
  std::vector<int> resolution_levels;

  int effective_bottleneck_width() const {
    return bottleneck_width > 0 ? bottleneck_width : 4 * growth_rate;
  }
  int effective_initial_channels() const {
    return initial_channels > 0 ? initial_channels : 2 * growth_rate;
  }
};

enum class OpKind {
  kConv,
  kTransposedConv,  // stride 2, doubles the resolution
  kNorm,            // per-channel scale and shift
  kRelu,
  kAvgPool,         // 2x2, stride 2
  kMaxPool,         // 2x2, stride 2
  kGlobalAvgPool,
  kLinear,
};

std::string op_kind_name(OpKind kind);

struct Op {
  OpKind kind = OpKind::kConv;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int level = 0;  // resolution level of the op's input
  bool bias = false;
};

enum class StepKind {
  kInitial,      // image -> x_0
  kLayer,        // feature layer
  kTransition,   // rescales one producer (or a baseline skip tensor)
  kCompression,  // squeezes a finished block into a compression node
  kStackTransform,  // re-transforms the older compressed stack
  kStackConcat,  // joins compressed features; no ops
  kHead,         // prediction head
};

std::string step_kind_name(StepKind kind);

struct TensorInfo {
  int channels = 0;
  int level = 0;
  NodeId origin = -1;  // producing node, -1 for the image and stacks
  int version = 0;     // number of transitions applied to `origin`
};

struct Step {
  StepKind kind = StepKind::kLayer;
  NodeId node = -1;
  int block = 0;  // block this step's cost is attributed to
  std::vector<int> inputs;  // tensor ids, concatenated in order
  std::vector<Op> ops;
  int output = -1;
  bool final_head = false;
};

struct LayerRecord {
  NodeId node = -1;
  int block = 0;
  int level = 0;
  int input_channels = 0;
  int bottleneck_channels = 0;  // 0 without a bottleneck
  int output_channels = 0;
  int step = -1;
};

struct NetworkPlan {
  std::string name;
  NetworkConfig config;
  std::vector<int> block_levels;
  std::vector<TensorInfo> tensors;  // tensor 0 is the input image
  std::vector<Step> steps;          // in execution order
  std::vector<LayerRecord> layers;  // initial, feature and compression nodes
  std::vector<int> head_steps;      // auxiliary heads first, final head last
  std::vector<int> node_tensor;     // native output tensor of each node (-1 if none)
  int num_blocks() const { return static_cast<int>(block_levels.size()); }
  HeadKind head_kind = HeadKind::kClassifier;
};

NetworkPlan instantiate(const Topology& topo, const NetworkConfig& cfg);

// Checks that each layer's concatenated input width equals the summed widths
// of its producers, all at the layer's resolution. Returns the violations.
std::vector<std::string> check_channel_conservation(const NetworkPlan& plan,
                                                    const Topology& topo);

struct CostReport {
  std::vector<std::pair<NodeId, std::int64_t>> per_layer_flops;
  std::vector<std::int64_t> per_block_flops;
  std::vector<std::int64_t> per_boundary_transition_flops;  // boundary b: after block b
  std::int64_t total_flops = 0;
  std::int64_t conv_macs = 0;       // multiply-accumulates of conv/linear ops
  std::int64_t elementwise_ops = 0; // normalization and pooling
  std::int64_t total_params = 0;
  FlopConvention convention = FlopConvention::kMAC;
  std::vector<std::string> assumptions;
};

// Cost of one op at the plan's input resolution, before the convention.
struct OpCost {
  std::int64_t macs = 0;
  std::int64_t elementwise = 0;
};
OpCost op_cost(const Op& op, int input_height, int input_width);
std::int64_t op_params(const Op& op);

CostReport flops(const NetworkPlan& plan, const NetworkConfig& cfg);
std::int64_t params(const NetworkPlan& plan);
std::vector<double> block_cost_distribution(const CostReport& report);

// FC-Log-DenseNet plan over `cfg.block_sizes` (default 11 blocks).
NetworkPlan fc_plan(const NetworkConfig& cfg);

// Table-2 settings for FC-Log-DenseNet V1-103: g = 24, no bottleneck,
// 224x224, 11 classes, two FLOPs per multiply-accumulate.
NetworkConfig fc_logdense103_config();
// FC-DenseNet103 reference: g = 16, 48 initial channels, plain 3x3 layers,
// skip connections between down and up paths, no auxiliary heads.
NetworkConfig fc_densenet103_config();
NetworkPlan fc_densenet103_plan(const NetworkConfig& cfg = fc_densenet103_config());

std::string cost_report_json(const CostReport& report, const NetworkPlan& plan);
std::string cost_csv_header();
std::string cost_csv_row(const std::string& name, const CostReport& report);

}  // namespace logdense

#endif  // LOGDENSE_COST_MODEL_HPP_
