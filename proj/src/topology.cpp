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

#include "logdense/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

namespace logdense {

namespace {

void sort_unique(std::vector<NodeId>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<int> resolve_blocks(int num_layers, std::vector<int> block_sizes) {
  if (num_layers < 1) {
    throw ConfigError("layer count must be at least 1, got " + std::to_string(num_layers));
  }
  if (block_sizes.empty()) return {num_layers};
  long long sum = 0;
  for (int b : block_sizes) {
    if (b < 1) throw ConfigError("block sizes must be positive");
    sum += b;
  }
  if (sum != num_layers) {
    throw ConfigError("block sizes sum to " + std::to_string(sum) + " but there are " +
                      std::to_string(num_layers) + " layers");
  }
  return block_sizes;
}

// Block index of each layer 0..L (layer 0 sits in block 0).
std::vector<int> layer_blocks(const std::vector<int>& block_sizes) {
  std::vector<int> out{0};
  for (int b = 0; b < static_cast<int>(block_sizes.size()); ++b) {
    out.insert(out.end(), block_sizes[b], b);
  }
  return out;
}

// Builds a topology whose node ids coincide with layer indices.
Topology layered(Scheme scheme, std::vector<int> block_sizes,
                 std::vector<std::vector<NodeId>> inputs,
                 std::map<std::string, ParamValue> params = {}) {
  const auto blocks = layer_blocks(block_sizes);
  std::vector<Node> nodes;
  nodes.reserve(blocks.size());
  for (int i = 0; i < static_cast<int>(blocks.size()); ++i) {
    nodes.push_back({i, i == 0 ? NodeKind::kInitial : NodeKind::kFeature, blocks[i]});
  }
  for (auto& in : inputs) sort_unique(in);
  return Topology(scheme, std::move(block_sizes), std::move(nodes), std::move(inputs),
                  std::move(params));
}

std::string budget_name(Budget b) { return b == Budget::kLog ? "log" : "half"; }

}  // namespace

int floor_log2(std::int64_t x) {
  if (x < 1) throw std::domain_error("floor_log2 of non-positive value");
  int r = 0;
  while (x >>= 1) ++r;
  return r;
}

int ceil_log2(std::int64_t x) {
  const int f = floor_log2(x);
  return (std::int64_t{1} << f) == x ? f : f + 1;
}

std::vector<NodeId> log_dense_offsets(int i) {
  std::vector<NodeId> out;
  if (i < 1) return out;
  for (int k = 0; k <= floor_log2(i); ++k) out.push_back(i - (1 << k));
  return out;
}

// ---------------------------------------------------------------------------
// Topology

Topology::Topology(Scheme scheme, std::vector<int> block_sizes, std::vector<Node> nodes,
                   std::vector<std::vector<NodeId>> inputs,
                   std::map<std::string, ParamValue> scheme_params)
    : scheme_(scheme),
      block_sizes_(std::move(block_sizes)),
      nodes_(std::move(nodes)),
      inputs_(std::move(inputs)),
      scheme_params_(std::move(scheme_params)) {
  layer_of_.assign(nodes_.size(), -1);
  int layer = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeKind::kCompression) continue;
    layer_of_[i] = layer++;
    node_of_layer_.push_back(static_cast<NodeId>(i));
  }
  num_layers_ = layer - 1;
  validate();
}

NodeId Topology::block_end(int block) const {
  if (block < 0 || block >= num_blocks()) throw ConfigError("block index out of range");
  int layer = 0;
  for (int b = 0; b <= block; ++b) layer += block_sizes_[b];
  return node_of_layer(layer);
}

std::int64_t Topology::num_edges() const {
  std::int64_t n = 0;
  for (const auto& in : inputs_) n += static_cast<std::int64_t>(in.size());
  return n;
}

bool Topology::has_edge(NodeId consumer, NodeId producer) const {
  const auto& in = inputs(consumer);
  return std::binary_search(in.begin(), in.end(), producer);
}

std::optional<std::int64_t> Topology::int_param(const std::string& key) const {
  auto it = scheme_params_.find(key);
  if (it == scheme_params_.end()) return std::nullopt;
  if (auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
  return std::nullopt;
}

std::optional<std::string> Topology::string_param(const std::string& key) const {
  auto it = scheme_params_.find(key);
  if (it == scheme_params_.end()) return std::nullopt;
  if (auto* v = std::get_if<std::string>(&it->second)) return *v;
  return std::nullopt;
}

std::optional<std::vector<std::int64_t>> Topology::list_param(const std::string& key) const {
  auto it = scheme_params_.find(key);
  if (it == scheme_params_.end()) return std::nullopt;
  if (auto* v = std::get_if<std::vector<std::int64_t>>(&it->second)) return *v;
  return std::nullopt;
}

void Topology::validate() const {
  const int n = num_nodes();
  if (n < 2) throw ConfigError("topology needs the initial node and at least one layer");
  if (static_cast<int>(inputs_.size()) != n) throw ConfigError("input map size mismatch");
  if (block_sizes_.empty()) throw ConfigError("topology has no blocks");
  std::vector<int> per_block(block_sizes_.size(), 0);
  int prev_block = 0;
  for (int i = 0; i < n; ++i) {
    const Node& nd = nodes_[i];
    if (nd.id != i) throw ConfigError("node ids must be contiguous from 0");
    if ((i == 0) != (nd.kind == NodeKind::kInitial)) {
      throw ConfigError("exactly node 0 must be the initial node");
    }
    if (nd.kind == NodeKind::kCompression && scheme_ != Scheme::kLogDenseV2) {
      throw ConfigError("compression nodes only exist in block-compressed topologies");
    }
    if (nd.block < prev_block || nd.block >= num_blocks()) {
      throw ConfigError("block assignment must be non-decreasing and in range at node " +
                        std::to_string(i));
    }
    prev_block = nd.block;
    if (nd.kind == NodeKind::kFeature) ++per_block[nd.block];
    const auto& in = inputs_[i];
    if (i == 0 && !in.empty()) throw ConfigError("the initial node takes no inputs");
    if (i > 0 && in.empty()) {
      throw ConfigError("node " + std::to_string(i) + " has no inputs");
    }
    for (std::size_t k = 0; k < in.size(); ++k) {
      if (in[k] < 0 || in[k] >= i) {
        throw ConfigError("node " + std::to_string(i) + " has a non-causal input " +
                          std::to_string(in[k]));
      }
      if (k > 0 && in[k] <= in[k - 1]) {
        throw ConfigError("input set of node " + std::to_string(i) +
                          " is unsorted or has duplicates");
      }
    }
  }
  if (per_block != block_sizes_) throw ConfigError("block sizes disagree with node blocks");
}

bool Topology::operator==(const Topology& other) const {
  if (scheme_ != other.scheme_ || block_sizes_ != other.block_sizes_ ||
      inputs_ != other.inputs_ || scheme_params_ != other.scheme_params_ ||
      nodes_.size() != other.nodes_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& a = nodes_[i];
    const Node& b = other.nodes_[i];
    if (a.id != b.id || a.kind != b.kind || a.block != b.block) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Names

namespace {
const std::vector<std::pair<Scheme, std::string>>& scheme_names() {
  static const std::vector<std::pair<Scheme, std::string>> names = {
      {Scheme::kDense, "dense"},
      {Scheme::kLogDenseV1, "logdense-v1"},
      {Scheme::kLogDenseV2, "logdense-v2"},
      {Scheme::kLogLog, "loglog"},
      {Scheme::kNearest, "nearest"},
      {Scheme::kEvenlySpaced, "evenly-spaced"},
      {Scheme::kNearestHalfAndLog, "nearest-half-and-log"},
      {Scheme::kFCLogDense, "fc-logdense"},
  };
  return names;
}
}  // namespace

std::string scheme_name(Scheme scheme) {
  for (const auto& [s, name] : scheme_names()) {
    if (s == scheme) return name;
  }
  throw std::logic_error("unknown scheme");
}

Scheme parse_scheme(const std::string& name) {
  for (const auto& [s, n] : scheme_names()) {
    if (n == name) return s;
  }
  throw ConfigError("unknown scheme '" + name + "'");
}

std::string node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::kInitial: return "initial";
    case NodeKind::kFeature: return "feature";
    case NodeKind::kCompression: return "compression";
  }
  throw std::logic_error("unknown node kind");
}

NodeKind parse_node_kind(const std::string& name) {
  if (name == "initial") return NodeKind::kInitial;
  if (name == "feature") return NodeKind::kFeature;
  if (name == "compression") return NodeKind::kCompression;
  throw ConfigError("unknown node kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// Generators

Topology dense_topology(int num_layers, std::vector<int> block_sizes) {
  block_sizes = resolve_blocks(num_layers, std::move(block_sizes));
  std::vector<std::vector<NodeId>> inputs(num_layers + 1);
  for (int i = 1; i <= num_layers; ++i) {
    inputs[i].resize(i);
    std::iota(inputs[i].begin(), inputs[i].end(), 0);
  }
  return layered(Scheme::kDense, std::move(block_sizes), std::move(inputs));
}

Topology log_dense_v1(int num_layers, std::vector<int> block_sizes) {
  block_sizes = resolve_blocks(num_layers, std::move(block_sizes));
  std::vector<std::vector<NodeId>> inputs(num_layers + 1);
  for (int i = 1; i <= num_layers; ++i) inputs[i] = log_dense_offsets(i);
  return layered(Scheme::kLogDenseV1, std::move(block_sizes), std::move(inputs));
}

Topology log_dense_v2(int num_layers, std::vector<int> block_sizes, int growth_rate) {
  block_sizes = resolve_blocks(num_layers, std::move(block_sizes));
  if (block_sizes.size() < 2) {
    throw ConfigError("block compression needs at least two blocks");
  }
  if (growth_rate < 1) throw ConfigError("growth rate must be positive");

  std::vector<Node> nodes{{0, NodeKind::kInitial, 0}};
  std::vector<std::vector<NodeId>> inputs{{}};
  std::vector<NodeId> layer_node{0};  // layer index -> node id
  std::vector<NodeId> compressed;     // compression nodes created so far
  int first_layer = 0;
  for (int b = 0; b < static_cast<int>(block_sizes.size()); ++b) {
    if (b > 0) {
      const NodeId c = static_cast<NodeId>(nodes.size());
      std::vector<NodeId> in;
      for (int l = first_layer; l < first_layer + block_sizes[b - 1]; ++l) {
        in.push_back(layer_node[l + 1]);
      }
      nodes.push_back({c, NodeKind::kCompression, b});
      inputs.push_back(std::move(in));
      compressed.push_back(c);
      first_layer += block_sizes[b - 1];
    }
    // Layers of block b are first_layer+1 .. first_layer+size; block 0 may
    // also reach the initial node through Eq.-2 offsets.
    const int lowest = b == 0 ? 0 : first_layer + 1;
    for (int i = first_layer + 1; i <= first_layer + block_sizes[b]; ++i) {
      std::vector<NodeId> in{0};
      for (NodeId j : log_dense_offsets(i)) {
        if (j >= lowest) in.push_back(layer_node[j]);
      }
      in.insert(in.end(), compressed.begin(), compressed.end());
      sort_unique(in);
      const NodeId id = static_cast<NodeId>(nodes.size());
      nodes.push_back({id, NodeKind::kFeature, b});
      inputs.push_back(std::move(in));
      layer_node.push_back(id);
    }
  }
  const auto width = static_cast<std::int64_t>(
      std::ceil(growth_rate * std::log2(static_cast<double>(num_layers)) - 1e-9));
  std::map<std::string, ParamValue> params{
      {"growth_rate", std::int64_t{growth_rate}},
      {"compression_width", std::max<std::int64_t>(width, 1)},
  };
  return Topology(Scheme::kLogDenseV2, std::move(block_sizes), std::move(nodes),
                  std::move(inputs), std::move(params));
}

Topology nearest(int num_layers, std::vector<int> block_sizes, Budget budget) {
  block_sizes = resolve_blocks(num_layers, std::move(block_sizes));
  std::vector<std::vector<NodeId>> inputs(num_layers + 1);
  for (int i = 1; i <= num_layers; ++i) {
    const int count = budget == Budget::kLog ? std::max(1, floor_log2(i)) : (i + 1) / 2;
    for (int k = 1; k <= count && i - k >= 0; ++k) inputs[i].push_back(i - k);
  }
  return layered(Scheme::kNearest, std::move(block_sizes), std::move(inputs),
                 {{"budget", budget_name(budget)}});
}

Topology evenly_spaced(int num_layers, std::vector<int> block_sizes, Budget budget) {
  block_sizes = resolve_blocks(num_layers, std::move(block_sizes));
  std::vector<std::vector<NodeId>> inputs(num_layers + 1);
  for (int i = 1; i <= num_layers; ++i) {
    auto& in = inputs[i];
    if (budget == Budget::kHalf) {
      for (int j = i - 1; j >= 0; j -= 2) in.push_back(j);
    } else if (i == 1) {
      in.push_back(0);
    } else {
      const double delta = i / std::log2(static_cast<double>(i));
      for (int k = 0; k * delta <= i - 1 + 1e-9; ++k) {
        const double pos = i - 1 - k * delta;
        in.push_back(std::max(0, static_cast<int>(std::floor(pos + 0.5))));
      }
    }
  }
  return layered(Scheme::kEvenlySpaced, std::move(block_sizes), std::move(inputs),
                 {{"budget", budget_name(budget)}});
}

Topology nearest_half_and_log(int num_layers, std::vector<int> block_sizes) {
  block_sizes = resolve_blocks(num_layers, std::move(block_sizes));
  std::vector<std::vector<NodeId>> inputs(num_layers + 1);
  for (int i = 1; i <= num_layers; ++i) {
    auto& in = inputs[i];
    for (int k = 1; k <= (i + 1) / 2; ++k) in.push_back(i - k);
    // round(i / 2^k) for k = 2, 3, ... until the chain reaches layer 0
    for (int k = 2;; ++k) {
      const int v = k >= 31 ? 0 : static_cast<int>((i + (1LL << (k - 1))) >> k);
      in.push_back(v);
      if (v == 0) break;
    }
  }
  return layered(Scheme::kNearestHalfAndLog, std::move(block_sizes), std::move(inputs));
}

// ---------------------------------------------------------------------------
// LogLog

namespace {
std::vector<int> key_locations(int start, int end) {
  const long long n = end - start + 1;
  int d = static_cast<int>(std::sqrt(static_cast<double>(n)));
  while (static_cast<long long>(d + 1) * (d + 1) <= n) ++d;
  while (static_cast<long long>(d) * d > n) --d;
  std::vector<int> keys{start};
  for (int v = end; v >= start; v -= d) keys.push_back(v);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}
}  // namespace

void lglg_conn(int start, int end, std::vector<std::vector<NodeId>>& edges,
               const LglgOptions& options) {
  if (start < 0 || end < start || end >= static_cast<int>(edges.size())) {
    throw ConfigError("lglg_conn segment out of range");
  }
  if (end - start <= 1) return;
  const auto keys = key_locations(start, end);
  std::set<std::pair<int, int>> added;
  const bool trace = options.trace != nullptr;
  auto add = [&](int consumer, int producer) {
    edges[consumer].push_back(producer);
    if (trace) added.emplace(consumer, producer);
  };
  // (a) dense among key locations
  for (std::size_t a = 0; a < keys.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) add(keys[a], keys[b]);
  }
  // (b) each key feeds the segment up to the next key
  if (options.step_b) {
    for (std::size_t k = 0; k + 1 < keys.size(); ++k) {
      for (int j = keys[k] + 1; j <= keys[k + 1]; ++j) add(j, keys[k]);
    }
  }
  if (trace) {
    options.trace->push_back(
        {start, end, keys, static_cast<std::int64_t>(added.size())});
  }
  // (c) recurse between consecutive keys
  for (std::size_t k = 0; k + 1 < keys.size(); ++k) {
    lglg_conn(keys[k], keys[k + 1], edges, options);
  }
}

std::vector<NodeId> lglg_root_keys(int num_layers) {
  if (num_layers <= 1) return {};
  return key_locations(0, num_layers);
}

Topology loglog_topology(int num_layers, std::vector<int> block_sizes, int min_inputs,
                         bool step_b) {
  block_sizes = resolve_blocks(num_layers, std::move(block_sizes));
  if (min_inputs < 1) throw ConfigError("min_inputs must be at least 1");
  std::vector<std::vector<NodeId>> inputs(num_layers + 1);
  for (int i = 1; i <= num_layers; ++i) inputs[i].push_back(i - 1);
  LglgOptions opts;
  opts.step_b = step_b;
  lglg_conn(0, num_layers, inputs, opts);
  for (int i = 1; i <= num_layers; ++i) {
    auto& in = inputs[i];
    sort_unique(in);
    for (NodeId j : log_dense_offsets(i)) {
      if (static_cast<int>(in.size()) >= min_inputs) break;
      if (!std::binary_search(in.begin(), in.end(), j)) {
        in.insert(std::lower_bound(in.begin(), in.end(), j), j);
      }
    }
  }
  const auto keys = lglg_root_keys(num_layers);
  std::map<std::string, ParamValue> params{
      {"min_inputs", std::int64_t{min_inputs}},
      {"step_b", std::int64_t{step_b ? 1 : 0}},
      {"hubs", std::vector<std::int64_t>(keys.begin(), keys.end())},
  };
  return layered(Scheme::kLogLog, std::move(block_sizes), std::move(inputs),
                 std::move(params));
}

// ---------------------------------------------------------------------------
// Fully convolutional

std::vector<int> fc_default_blocks() { return {4, 5, 7, 10, 12, 15, 12, 10, 7, 5, 4}; }

std::vector<int> fc_resolution_levels(int num_blocks) {
  if (num_blocks < 1 || num_blocks % 2 == 0) {
    throw ConfigError("fully convolutional networks need an odd number of blocks");
  }
  const int half = num_blocks / 2;
  std::vector<int> levels(num_blocks);
  for (int b = 0; b < num_blocks; ++b) levels[b] = b <= half ? b : num_blocks - 1 - b;
  return levels;
}

Topology fc_log_dense_topology(std::vector<int> block_sizes, std::optional<NodeId> anchor) {
  if (block_sizes.empty() || block_sizes.size() % 2 == 0) {
    throw ConfigError("fully convolutional networks need an odd number of blocks");
  }
  const int num_layers = std::accumulate(block_sizes.begin(), block_sizes.end(), 0);
  block_sizes = resolve_blocks(num_layers, std::move(block_sizes));
  const NodeId last_of_first = block_sizes.front();
  if (anchor && *anchor != last_of_first) {
    throw ConfigError("anchor must be the last layer of the first block (" +
                      std::to_string(last_of_first) + ")");
  }
  std::vector<std::vector<NodeId>> inputs(num_layers + 1);
  for (int i = 1; i <= num_layers; ++i) {
    inputs[i] = log_dense_offsets(i);
    if (i > last_of_first) inputs[i].push_back(last_of_first);
  }
  const auto levels = fc_resolution_levels(static_cast<int>(block_sizes.size()));
  std::map<std::string, ParamValue> params{
      {"anchor", std::int64_t{last_of_first}},
      {"resolution_levels", std::vector<std::int64_t>(levels.begin(), levels.end())},
  };
  return layered(Scheme::kFCLogDense, std::move(block_sizes), std::move(inputs),
                 std::move(params));
}

}  // namespace logdense
