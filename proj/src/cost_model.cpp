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

#include "logdense/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "json.hpp"

namespace logdense {

std::string compression_name(Compression c) {
  switch (c) {
    case Compression::kNone: return "none";
    case Compression::kV1IndependentTransition: return "v1";
    case Compression::kV2BlockCompression: return "v2";
  }
  throw std::logic_error("unknown compression");
}

Compression parse_compression(const std::string& name) {
  if (name == "none") return Compression::kNone;
  if (name == "v1") return Compression::kV1IndependentTransition;
  if (name == "v2") return Compression::kV2BlockCompression;
  throw ConfigError("unknown compression '" + name + "' (expected none, v1 or v2)");
}

std::string flop_convention_name(FlopConvention c) {
  return c == FlopConvention::kMAC ? "MAC" : "MACx2";
}

std::string op_kind_name(OpKind kind) {
  switch (kind) {
    case OpKind::kConv: return "conv";
    case OpKind::kTransposedConv: return "transposed_conv";
    case OpKind::kNorm: return "norm";
    case OpKind::kRelu: return "relu";
    case OpKind::kAvgPool: return "avg_pool";
    case OpKind::kMaxPool: return "max_pool";
    case OpKind::kGlobalAvgPool: return "global_avg_pool";
    case OpKind::kLinear: return "linear";
  }
  throw std::logic_error("unknown op kind");
}

std::string step_kind_name(StepKind kind) {
  switch (kind) {
    case StepKind::kInitial: return "initial";
    case StepKind::kLayer: return "layer";
    case StepKind::kTransition: return "transition";
    case StepKind::kCompression: return "compression";
    case StepKind::kStackTransform: return "stack_transform";
    case StepKind::kStackConcat: return "stack_concat";
    case StepKind::kHead: return "head";
  }
  throw std::logic_error("unknown step kind");
}

namespace {

Op conv(int cin, int cout, int k, int level, bool bias = false) {
  return {OpKind::kConv, cin, cout, k, level, bias};
}
Op norm(int c, int level) { return {OpKind::kNorm, c, c, 1, level, false}; }
Op relu(int c, int level) { return {OpKind::kRelu, c, c, 1, level, false}; }

std::vector<Op> layer_ops(int cin, int out, int level, const NetworkConfig& cfg) {
  if (cfg.bottleneck) {
    const int bw = cfg.effective_bottleneck_width();
    return {norm(cin, level), relu(cin, level), conv(cin, bw, 1, level),
            norm(bw, level),  relu(bw, level),  conv(bw, out, 3, level)};
  }
  return {norm(cin, level), relu(cin, level), conv(cin, out, 3, level)};
}

std::vector<Op> down_ops(int c, int level) {
  return {norm(c, level), relu(c, level), conv(c, c, 1, level),
          {OpKind::kAvgPool, c, c, 2, level, false}};
}

std::vector<Op> up_ops(int c, int level, int kernel) {
  return {norm(c, level), relu(c, level), {OpKind::kTransposedConv, c, c, kernel, level, false}};
}

std::vector<Op> head_ops(int c, int level, HeadKind kind, int classes) {
  if (kind == HeadKind::kPixelwise) {
    return {norm(c, level), relu(c, level), conv(c, classes, 1, level, true)};
  }
  return {norm(c, level), relu(c, level), {OpKind::kGlobalAvgPool, c, c, 1, level, false},
          {OpKind::kLinear, c, classes, 1, level, true}};
}

class Builder {
 public:
  explicit Builder(NetworkPlan& plan) : plan_(plan) {}

  int tensor(int channels, int level, NodeId origin = -1, int version = 0) {
    plan_.tensors.push_back({channels, level, origin, version});
    return static_cast<int>(plan_.tensors.size()) - 1;
  }

  int channels_of(const std::vector<int>& tensors) const {
    int c = 0;
    for (int t : tensors) c += plan_.tensors[t].channels;
    return c;
  }

  // Appends a step whose output has `out_channels` at `out_level`.
  int step(StepKind kind, NodeId node, int block, std::vector<int> inputs, std::vector<Op> ops,
           int out_channels, int out_level, int version = 0) {
    const int out = tensor(out_channels, out_level,
                           kind == StepKind::kStackConcat || kind == StepKind::kStackTransform ||
                                   kind == StepKind::kHead
                               ? -1
                               : node,
                           version);
    plan_.steps.push_back({kind, node, block, std::move(inputs), std::move(ops), out, false});
    return out;
  }

  int last_step() const { return static_cast<int>(plan_.steps.size()) - 1; }

 private:
  NetworkPlan& plan_;
};

void validate_config(const NetworkConfig& cfg) {
  if (cfg.growth_rate < 1) throw ConfigError("growth rate must be at least 1");
  if (cfg.hub_multiplier < 1) throw ConfigError("hub multiplier must be at least 1");
  if (cfg.bottleneck_width < 0 || cfg.initial_channels < 0) {
    throw ConfigError("channel counts must be non-negative");
  }
  if (cfg.image_channels < 1 || cfg.num_classes < 1) {
    throw ConfigError("image channels and class count must be positive");
  }
  if (cfg.input_height < 1 || cfg.input_width < 1) throw ConfigError("input size must be positive");
  if (cfg.transposed_kernel < 1) throw ConfigError("transposed kernel must be positive");
}

void check_divisible(const NetworkConfig& cfg, const std::vector<int>& levels) {
  const int deepest = levels.empty() ? 0 : *std::max_element(levels.begin(), levels.end());
  const int f = 1 << deepest;
  if (cfg.input_height % f != 0 || cfg.input_width % f != 0) {
    throw ConfigError("input resolution " + std::to_string(cfg.input_height) + "x" +
                      std::to_string(cfg.input_width) + " is not divisible by 2^" +
                      std::to_string(deepest));
  }
}

std::vector<int> resolve_levels(const Topology& topo, const NetworkConfig& cfg) {
  const int nb = topo.num_blocks();
  std::vector<int> levels;
  if (!cfg.resolution_levels.empty()) {
    levels = cfg.resolution_levels;
  } else if (auto recorded = topo.list_param("resolution_levels")) {
    levels.assign(recorded->begin(), recorded->end());
  } else {
    levels.resize(nb, 0);
    if (cfg.compression != Compression::kNone) std::iota(levels.begin(), levels.end(), 0);
  }
  if (static_cast<int>(levels.size()) != nb) {
    throw ConfigError("resolution schedule must have one level per block");
  }
  for (int b = 0; b < nb; ++b) {
    if (levels[b] < 0) throw ConfigError("resolution levels must be non-negative");
    if (b > 0 && std::abs(levels[b] - levels[b - 1]) > 1) {
      throw ConfigError("resolution may change by at most one level per block boundary");
    }
    if (b > 0 && levels[b] != levels[b - 1] && cfg.compression == Compression::kNone) {
      throw ConfigError("changing resolution requires a transition scheme");
    }
  }
  if (levels.front() != 0) throw ConfigError("the first block must be at full resolution");
  return levels;
}

}  // namespace

NetworkPlan instantiate(const Topology& topo, const NetworkConfig& cfg) {
  validate_config(cfg);
  if (!cfg.block_sizes.empty() && cfg.block_sizes != topo.block_sizes()) {
    throw ConfigError("configured block sizes do not match the topology's blocks");
  }
  if (cfg.hub_multiplier > 1 && topo.scheme() != Scheme::kLogLog) {
    throw ConfigError("hub multiplier only applies to LogLog topologies");
  }
  const bool v2 = topo.scheme() == Scheme::kLogDenseV2;
  if (v2 != (cfg.compression == Compression::kV2BlockCompression)) {
    throw ConfigError("block compression and block-compressed topologies go together");
  }
  if (topo.scheme() == Scheme::kFCLogDense &&
      cfg.compression != Compression::kV1IndependentTransition) {
    throw ConfigError("fully convolutional plans use independent transitions");
  }
  if (v2 && topo.int_param("growth_rate") != cfg.growth_rate) {
    throw ConfigError("topology was compressed for a different growth rate");
  }

  NetworkPlan plan;
  plan.name = scheme_name(topo.scheme());
  plan.config = cfg;
  plan.config.block_sizes = topo.block_sizes();
  plan.block_levels = resolve_levels(topo, cfg);
  check_divisible(cfg, plan.block_levels);
  const bool fc = topo.scheme() == Scheme::kFCLogDense;
  const bool lazy = cfg.lazy_transitions.value_or(fc);
  plan.head_kind = cfg.head.value_or(fc ? HeadKind::kPixelwise : HeadKind::kClassifier);

  const int n = topo.num_nodes();
  const int g = cfg.growth_rate;
  std::set<NodeId> hub_set;
  if (topo.scheme() == Scheme::kLogLog && cfg.hub_multiplier > 1) {
    for (auto h : topo.list_param("hubs").value_or(std::vector<std::int64_t>{})) {
      if (h >= 1) hub_set.insert(static_cast<NodeId>(h));
    }
  }
  auto width = [&](NodeId id) {
    switch (topo.node(id).kind) {
      case NodeKind::kInitial: return cfg.effective_initial_channels();
      case NodeKind::kCompression:
        return static_cast<int>(topo.int_param("compression_width").value());
      case NodeKind::kFeature: return hub_set.count(id) ? g * cfg.hub_multiplier : g;
    }
    return 0;
  };

  // Furthest block that consumes each producer.
  std::vector<int> last_consumer(n, -1);
  for (const Node& nd : topo.nodes()) {
    if (nd.kind != NodeKind::kFeature) continue;
    for (NodeId p : topo.inputs(nd.id)) last_consumer[p] = std::max(last_consumer[p], nd.block);
  }

  Builder b(plan);
  plan.node_tensor.assign(n, -1);
  plan.layers.resize(n);
  std::vector<int> current(n, -1);  // latest rescaled version of each producer

  b.tensor(cfg.image_channels, 0);
  {
    const int c0 = width(0);
    const int t = b.step(StepKind::kInitial, 0, 0, {0}, {conv(cfg.image_channels, c0, 3, 0)}, c0,
                         0, 0);
    plan.node_tensor[0] = current[0] = t;
    plan.layers[0] = {0, 0, 0, cfg.image_channels, 0, c0, b.last_step()};
  }

  int stack = -1;                 // V2 compressed stack at the current block
  std::set<NodeId> stack_members{0};
  const int nb = topo.num_blocks();
  for (int blk = 0; blk < nb; ++blk) {
    const int level = plan.block_levels[blk];
    if (blk > 0) {
      const int prev = plan.block_levels[blk - 1];
      const NodeId boundary_end = topo.block_end(blk - 1);
      if (v2) {
        const int older = blk == 1 ? plan.node_tensor[0] : stack;
        const int oc = plan.tensors[older].channels;
        const int moved = b.step(StepKind::kStackTransform, -1, blk - 1, {older},
                                 down_ops(oc, prev), oc, level);
        NodeId cnode = -1;
        for (NodeId id = boundary_end + 1; id < n; ++id) {
          if (topo.node(id).kind == NodeKind::kCompression) {
            cnode = id;
            break;
          }
        }
        if (cnode < 0) throw ConfigError("missing compression node after block boundary");
        std::vector<int> feats;
        for (NodeId p : topo.inputs(cnode)) feats.push_back(plan.node_tensor.at(p));
        const int cin = b.channels_of(feats);
        const int w = width(cnode);
        const int ct = b.step(StepKind::kCompression, cnode, blk - 1, feats,
                              {norm(cin, prev), relu(cin, prev), conv(cin, w, 1, prev),
                               {OpKind::kAvgPool, w, w, 2, prev, false}},
                              w, level);
        plan.node_tensor[cnode] = ct;
        plan.layers[cnode] = {cnode, topo.node(cnode).block, prev, cin, 0, w, b.last_step()};
        stack = b.step(StepKind::kStackConcat, -1, blk - 1, {moved, ct}, {}, oc + w, level);
        stack_members.insert(cnode);
      } else if (level != prev) {
        for (NodeId j = 0; j <= boundary_end; ++j) {
          if (topo.node(j).kind == NodeKind::kCompression) continue;
          if (lazy && last_consumer[j] < blk) continue;
          const int t = current[j];
          const int c = plan.tensors[t].channels;
          auto ops = level > prev ? down_ops(c, prev) : up_ops(c, prev, cfg.transposed_kernel);
          current[j] = b.step(StepKind::kTransition, j, blk - 1, {t}, std::move(ops), c, level,
                              plan.tensors[t].version + 1);
        }
      }
    }

    const NodeId last = topo.block_end(blk);
    for (NodeId i = 0; i <= last; ++i) {
      const Node& nd = topo.node(i);
      if (nd.block != blk || nd.kind != NodeKind::kFeature) continue;
      std::vector<int> in;
      if (v2) {
        for (NodeId s : stack_members) {
          if (!topo.has_edge(i, s)) {
            throw ConfigError("layer " + std::to_string(i) + " does not consume compressed node " +
                              std::to_string(s));
          }
        }
        in.push_back(blk == 0 ? plan.node_tensor[0] : stack);
        for (NodeId p : topo.inputs(i)) {
          if (stack_members.count(p)) continue;
          if (topo.node(p).kind == NodeKind::kCompression || topo.node(p).block != blk) {
            throw ConfigError("block-compressed layer " + std::to_string(i) +
                              " reaches outside its block");
          }
          in.push_back(plan.node_tensor[p]);
        }
      } else {
        for (NodeId p : topo.inputs(i)) {
          const int t = current[p];
          if (t < 0 || plan.tensors[t].level != level) {
            throw ConfigError("producer " + std::to_string(p) + " has no transition chain to layer " +
                              std::to_string(i));
          }
          in.push_back(t);
        }
      }
      const int cin = b.channels_of(in);
      const int out = width(i);
      const int t = b.step(StepKind::kLayer, i, blk, in, layer_ops(cin, out, level, cfg), out,
                           level);
      plan.node_tensor[i] = current[i] = t;
      plan.layers[i] = {i, blk, level, cin, cfg.bottleneck ? cfg.effective_bottleneck_width() : 0,
                        out, b.last_step()};

      if (i == last && (cfg.deep_supervision || blk == nb - 1)) {
        std::vector<int> head_in = in;
        head_in.push_back(t);
        const int hc = b.channels_of(head_in);
        b.step(StepKind::kHead, i, blk, head_in,
               head_ops(hc, level, plan.head_kind, cfg.num_classes), cfg.num_classes,
               plan.head_kind == HeadKind::kPixelwise ? level : 0);
        plan.steps.back().final_head = blk == nb - 1;
        plan.head_steps.push_back(b.last_step());
      }
    }
  }
  return plan;
}

std::vector<std::string> check_channel_conservation(const NetworkPlan& plan,
                                                    const Topology& topo) {
  std::vector<std::string> problems;
  auto produced = [&](NodeId id) { return plan.layers.at(id).output_channels; };
  for (const Node& nd : topo.nodes()) {
    if (nd.kind == NodeKind::kInitial) continue;
    const LayerRecord& rec = plan.layers.at(nd.id);
    if (rec.step < 0) {
      problems.push_back("node " + std::to_string(nd.id) + " was not instantiated");
      continue;
    }
    int expected = 0;
    for (NodeId p : topo.inputs(nd.id)) expected += produced(p);
    if (expected != rec.input_channels) {
      problems.push_back("node " + std::to_string(nd.id) + " concatenates " +
                         std::to_string(rec.input_channels) + " channels, producers emit " +
                         std::to_string(expected));
    }
    const Step& s = plan.steps.at(rec.step);
    int seen = 0;
    for (int t : s.inputs) {
      seen += plan.tensors[t].channels;
      if (plan.tensors[t].level != rec.level) {
        problems.push_back("node " + std::to_string(nd.id) + " reads a tensor at level " +
                           std::to_string(plan.tensors[t].level) + " instead of " +
                           std::to_string(rec.level));
      }
    }
    if (seen != rec.input_channels) {
      problems.push_back("node " + std::to_string(nd.id) + " step inputs disagree with record");
    }
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Costs

OpCost op_cost(const Op& op, int input_height, int input_width) {
  const std::int64_t h = input_height >> op.level;
  const std::int64_t w = input_width >> op.level;
  const std::int64_t k2 = static_cast<std::int64_t>(op.kernel) * op.kernel;
  switch (op.kind) {
    case OpKind::kConv:
    case OpKind::kTransposedConv:
      // a transposed conv scatters one k x k kernel from every input pixel
      return {h * w * op.in_channels * op.out_channels * k2, 0};
    case OpKind::kLinear:
      return {static_cast<std::int64_t>(op.in_channels) * op.out_channels, 0};
    case OpKind::kNorm:
    case OpKind::kAvgPool:
    case OpKind::kMaxPool:
    case OpKind::kGlobalAvgPool:
      return {0, h * w * op.in_channels};
    case OpKind::kRelu:
      return {0, 0};
  }
  return {};
}

std::int64_t op_params(const Op& op) {
  switch (op.kind) {
    case OpKind::kConv:
    case OpKind::kTransposedConv:
    case OpKind::kLinear: {
      const std::int64_t k2 = static_cast<std::int64_t>(op.kernel) * op.kernel;
      const std::int64_t weights =
          op.kind == OpKind::kLinear ? std::int64_t{op.in_channels} * op.out_channels
                                     : std::int64_t{op.in_channels} * op.out_channels * k2;
      return weights + (op.bias ? op.out_channels : 0);
    }
    case OpKind::kNorm:
      return 2 * std::int64_t{op.in_channels};
    default:
      return 0;
  }
}

CostReport flops(const NetworkPlan& plan, const NetworkConfig& cfg) {
  check_divisible(cfg, plan.block_levels);
  CostReport rep;
  rep.convention = cfg.flop_convention;
  const std::int64_t mac_factor = cfg.flop_convention == FlopConvention::kMACx2 ? 2 : 1;
  rep.per_block_flops.assign(plan.num_blocks(), 0);
  rep.per_boundary_transition_flops.assign(plan.num_blocks(), 0);
  for (const Step& s : plan.steps) {
    std::int64_t step_flops = 0;
    for (const Op& op : s.ops) {
      const OpCost c = op_cost(op, cfg.input_height, cfg.input_width);
      rep.conv_macs += c.macs;
      rep.elementwise_ops += c.elementwise;
      step_flops += c.macs * mac_factor + c.elementwise;
    }
    rep.per_block_flops.at(s.block) += step_flops;
    rep.total_flops += step_flops;
    if (s.kind == StepKind::kLayer || s.kind == StepKind::kCompression) {
      rep.per_layer_flops.emplace_back(s.node, step_flops);
    }
    if (s.kind == StepKind::kTransition || s.kind == StepKind::kCompression ||
        s.kind == StepKind::kStackTransform) {
      rep.per_boundary_transition_flops.at(s.block) += step_flops;
    }
  }
  rep.total_params = params(plan);
  rep.assumptions = {
      cfg.flop_convention == FlopConvention::kMAC ? "1 FLOP per multiply-accumulate"
                                                  : "2 FLOPs per multiply-accumulate",
      "normalization and pooling cost one op per input element",
      "ReLU and concatenation are free",
      "transposed conv costs k*k*Cin*Cout per input pixel",
      "downsampling does not change channel counts",
      "normalization holds 2 parameters per channel; running statistics excluded",
  };
  return rep;
}

std::int64_t params(const NetworkPlan& plan) {
  std::int64_t total = 0;
  for (const Step& s : plan.steps) {
    for (const Op& op : s.ops) total += op_params(op);
  }
  return total;
}

std::vector<double> block_cost_distribution(const CostReport& report) {
  const double total = static_cast<double>(
      std::accumulate(report.per_block_flops.begin(), report.per_block_flops.end(), std::int64_t{0}));
  std::vector<double> out;
  for (std::int64_t f : report.per_block_flops) {
    out.push_back(total > 0 ? static_cast<double>(f) / total : 0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fully convolutional networks

NetworkPlan fc_plan(const NetworkConfig& cfg) {
  const auto blocks = cfg.block_sizes.empty() ? fc_default_blocks() : cfg.block_sizes;
  const Topology topo = fc_log_dense_topology(blocks);
  NetworkConfig c = cfg;
  c.block_sizes = blocks;
  NetworkPlan plan = instantiate(topo, c);
  plan.name = "FC-LogDenseNetV1-" + std::to_string(topo.num_layers() + 12);
  return plan;
}

NetworkConfig fc_logdense103_config() {
  NetworkConfig cfg;
  cfg.growth_rate = 24;
  cfg.bottleneck = false;
  cfg.block_sizes = fc_default_blocks();
  cfg.compression = Compression::kV1IndependentTransition;
  cfg.input_height = cfg.input_width = 224;
  cfg.initial_channels = 48;
  cfg.num_classes = 11;
  cfg.flop_convention = FlopConvention::kMACx2;
  return cfg;
}

NetworkConfig fc_densenet103_config() {
  NetworkConfig cfg;
  cfg.growth_rate = 16;
  cfg.bottleneck = false;
  cfg.block_sizes = fc_default_blocks();
  cfg.input_height = cfg.input_width = 224;
  cfg.initial_channels = 48;
  cfg.num_classes = 11;
  cfg.flop_convention = FlopConvention::kMACx2;
  cfg.deep_supervision = false;
  cfg.head = HeadKind::kPixelwise;
  return cfg;
}

NetworkPlan fc_densenet103_plan(const NetworkConfig& cfg) {
  validate_config(cfg);
  const auto blocks = cfg.block_sizes.empty() ? fc_default_blocks() : cfg.block_sizes;
  const auto levels = fc_resolution_levels(static_cast<int>(blocks.size()));
  const int half = static_cast<int>(blocks.size()) / 2;
  const int g = cfg.growth_rate;

  NetworkPlan plan;
  plan.name = "FC-DenseNet" + std::to_string(std::accumulate(blocks.begin(), blocks.end(), 0) + 12);
  plan.config = cfg;
  plan.config.block_sizes = blocks;
  plan.block_levels = levels;
  plan.head_kind = HeadKind::kPixelwise;
  check_divisible(cfg, levels);
  Builder b(plan);

  b.tensor(cfg.image_channels, 0);
  const int c0 = cfg.effective_initial_channels();
  NodeId node = 0;
  int block_in = b.step(StepKind::kInitial, node, 0, {0}, {conv(cfg.image_channels, c0, 3, 0)}, c0, 0);
  plan.layers.push_back({0, 0, 0, cfg.image_channels, 0, c0, b.last_step()});
  plan.node_tensor.push_back(block_in);

  std::vector<int> skips;
  std::vector<int> fresh;  // new features of the previous block
  for (int blk = 0; blk < static_cast<int>(blocks.size()); ++blk) {
    const int level = levels[blk];
    if (blk > half) {
      // upsample only the previous block's new features, then join the skip
      const int c = b.channels_of(fresh);
      const int up = b.step(StepKind::kTransition, -1, blk - 1, fresh,
                            {{OpKind::kTransposedConv, c, c, cfg.transposed_kernel, level + 1, false}},
                            c, level);
      const int skip = skips.back();
      skips.pop_back();
      block_in = b.step(StepKind::kStackConcat, -1, blk - 1, {up, skip}, {}, c + plan.tensors[skip].channels,
                        level);
    }
    fresh.clear();
    for (int l = 0; l < blocks[blk]; ++l) {
      std::vector<int> in{block_in};
      in.insert(in.end(), fresh.begin(), fresh.end());
      const int cin = b.channels_of(in);
      ++node;
      const int t = b.step(StepKind::kLayer, node, blk, in,
                           {norm(cin, level), relu(cin, level), conv(cin, g, 3, level)}, g, level);
      plan.layers.push_back({node, blk, level, cin, 0, g, b.last_step()});
      plan.node_tensor.push_back(t);
      fresh.push_back(t);
    }
    if (blk < half) {
      std::vector<int> all{block_in};
      all.insert(all.end(), fresh.begin(), fresh.end());
      const int m = b.channels_of(all);
      const int skip = b.step(StepKind::kStackConcat, -1, blk, all, {}, m, level);
      skips.push_back(skip);
      block_in = b.step(StepKind::kTransition, -1, blk, {skip},
                        {norm(m, level), relu(m, level), conv(m, m, 1, level),
                         {OpKind::kMaxPool, m, m, 2, level, false}},
                        m, level + 1);
    }
  }
  std::vector<int> out{block_in};
  out.insert(out.end(), fresh.begin(), fresh.end());
  const int m = b.channels_of(out);
  const int last = static_cast<int>(blocks.size()) - 1;
  b.step(StepKind::kHead, node, last, out, {conv(m, cfg.num_classes, 1, 0, true)}, cfg.num_classes, 0);
  plan.steps.back().final_head = true;
  plan.head_steps.push_back(b.last_step());
  return plan;
}

// ---------------------------------------------------------------------------
// Serialization

std::string cost_report_json(const CostReport& report, const NetworkPlan& plan) {
  nlohmann::ordered_json doc;
  doc["architecture"] = plan.name;
  doc["convention"] = flop_convention_name(report.convention);
  doc["input"] = {plan.config.input_height, plan.config.input_width};
  doc["growth_rate"] = plan.config.growth_rate;
  doc["total_flops"] = report.total_flops;
  doc["gflops"] = static_cast<double>(report.total_flops) / 1e9;
  doc["total_params"] = report.total_params;
  doc["conv_macs"] = report.conv_macs;
  doc["elementwise_ops"] = report.elementwise_ops;
  doc["per_block_flops"] = report.per_block_flops;
  doc["block_fractions"] = block_cost_distribution(report);
  doc["per_boundary_transition_flops"] = report.per_boundary_transition_flops;
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const auto& [node, f] : report.per_layer_flops) layers.push_back({node, f});
  doc["per_layer_flops"] = std::move(layers);
  doc["assumptions"] = report.assumptions;
  return doc.dump(1) + "\n";
}

std::string cost_csv_header() { return "architecture,gflops,params_m,convention\n"; }

std::string cost_csv_row(const std::string& name, const CostReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%.3f,%.3f,%s\n", name.c_str(),
                static_cast<double>(report.total_flops) / 1e9,
                static_cast<double>(report.total_params) / 1e6,
                flop_convention_name(report.convention).c_str());
  return buf;
}

}  // namespace logdense
