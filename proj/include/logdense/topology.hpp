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

#ifndef LOGDENSE_TOPOLOGY_HPP_
#define LOGDENSE_TOPOLOGY_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace logdense {

// Thrown for any configuration that does not describe a valid network.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using NodeId = int;

enum class NodeKind { kInitial, kFeature, kCompression };

enum class Scheme {
  kDense,
  kLogDenseV1,
  kLogDenseV2,
  kLogLog,
  kNearest,
  kEvenlySpaced,
  kNearestHalfAndLog,
  kFCLogDense,
};

// Per-layer input budget for the NEAREST / EVENLY-SPACED baselines.
enum class Budget { kLog, kHalf };

using ParamValue = std::variant<std::int64_t, std::string, std::vector<std::int64_t>>;

struct Node {
  NodeId id = 0;
  NodeKind kind = NodeKind::kFeature;
  int block = 0;
};

// A block-annotated connection DAG. Node 0 is the initial convolution; edges
// point from a consumer to each of its direct producers, and every producer
// index is strictly smaller than its consumer's.
class Topology {
 public:
  Topology() = default;
  Topology(Scheme scheme, std::vector<int> block_sizes, std::vector<Node> nodes,
           std::vector<std::vector<NodeId>> inputs,
           std::map<std::string, ParamValue> scheme_params = {});

  Scheme scheme() const { return scheme_; }
  // Number of feature layers (excludes the initial node and compression nodes).
  int num_layers() const { return num_layers_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_blocks() const { return static_cast<int>(block_sizes_.size()); }
  const std::vector<int>& block_sizes() const { return block_sizes_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  // Producers of `id`, sorted ascending.
  const std::vector<NodeId>& inputs(NodeId id) const { return inputs_.at(id); }
  const std::vector<std::vector<NodeId>>& all_inputs() const { return inputs_; }
  const std::map<std::string, ParamValue>& scheme_params() const { return scheme_params_; }

  // Feature-layer index (0 for the initial node) of a non-compression node.
  int layer_of(NodeId id) const { return layer_of_.at(id); }
  // Node holding feature layer `layer`.
  NodeId node_of_layer(int layer) const { return node_of_layer_.at(layer); }
  // Last node id belonging to a block's feature layers.
  NodeId block_end(int block) const;

  std::int64_t num_edges() const;
  bool has_edge(NodeId consumer, NodeId producer) const;

  std::optional<std::int64_t> int_param(const std::string& key) const;
  std::optional<std::string> string_param(const std::string& key) const;
  std::optional<std::vector<std::int64_t>> list_param(const std::string& key) const;

  // Throws ConfigError when any structural invariant is violated.
  void validate() const;

  bool operator==(const Topology& other) const;

 private:
  Scheme scheme_ = Scheme::kDense;
  int num_layers_ = 0;
  std::vector<int> block_sizes_;
  std::vector<Node> nodes_;
  std::vector<std::vector<NodeId>> inputs_;
  std::map<std::string, ParamValue> scheme_params_;
  std::vector<int> layer_of_;
  std::vector<NodeId> node_of_layer_;
};

std::string scheme_name(Scheme scheme);
Scheme parse_scheme(const std::string& name);
std::string node_kind_name(NodeKind kind);
NodeKind parse_node_kind(const std::string& name);

// floor(log2(x)) for x >= 1.
int floor_log2(std::int64_t x);
// ceil(log2(x)) for x >= 1.
int ceil_log2(std::int64_t x);

// Eq.-2 offsets: {i - 2^k : k = 0..floor(log2 i)}, nearest first.
std::vector<NodeId> log_dense_offsets(int i);

Topology dense_topology(int num_layers, std::vector<int> block_sizes = {});
Topology log_dense_v1(int num_layers, std::vector<int> block_sizes = {});
// Block-compressed variant; `growth_rate` only sets the recorded compression width.
Topology log_dense_v2(int num_layers, std::vector<int> block_sizes, int growth_rate);
Topology nearest(int num_layers, std::vector<int> block_sizes, Budget budget);
Topology evenly_spaced(int num_layers, std::vector<int> block_sizes, Budget budget);
Topology nearest_half_and_log(int num_layers, std::vector<int> block_sizes = {});

// Edges added by one lglg_conn call (steps a and b), before deduplication
// against edges that already exist in the graph.
struct LglgCall {
  int start = 0;
  int end = 0;
  std::vector<int> keys;  // sorted key locations K
  std::int64_t unique_edges = 0;
};

struct LglgOptions {
  bool step_b = true;
  // When set, every call is appended here in pre-order.
  std::vector<LglgCall>* trace = nullptr;
};

// Recursive LogLog connection builder over layers [start, end]. `edges[i]`
// collects the producers of layer i.
void lglg_conn(int start, int end, std::vector<std::vector<NodeId>>& edges,
               const LglgOptions& options = {});

// Key locations of the root call lglg_conn(0, L); empty when L <= 1.
std::vector<NodeId> lglg_root_keys(int num_layers);

Topology loglog_topology(int num_layers, std::vector<int> block_sizes = {},
                         int min_inputs = 1, bool step_b = true);

// Default FC-Log-DenseNet-103 block structure.
std::vector<int> fc_default_blocks();
// Resolution level (number of net halvings) of each block of an FC network
// with an odd number of blocks.
std::vector<int> fc_resolution_levels(int num_blocks);
Topology fc_log_dense_topology(std::vector<int> block_sizes = fc_default_blocks(),
                               std::optional<NodeId> anchor = std::nullopt);

}  // namespace logdense

#endif  // LOGDENSE_TOPOLOGY_HPP_
