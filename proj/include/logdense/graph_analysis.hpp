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

#ifndef LOGDENSE_GRAPH_ANALYSIS_HPP_
#define LOGDENSE_GRAPH_ANALYSIS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "logdense/topology.hpp"

namespace logdense {

// Reduced non-negative fraction.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational of(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

struct BDQuery {
  NodeId from = 0;
  NodeId to = 0;
};

// Distance of every node from `source`, following consumer -> producer edges.
// Unreachable nodes get -1.
std::vector<int> distances_from(const Topology& topo, NodeId source);

// Shortest consumer -> producer path length; nullopt when unreachable.
std::optional<int> backprop_distance(const Topology& topo, BDQuery q);

struct BDReport {
  int mbd = 0;
  std::pair<NodeId, NodeId> witness_pair{0, 0};
  std::map<int, std::int64_t> distance_histogram;
  Rational mean_bd;
  std::int64_t unreachable_pairs = 0;
};

// Exhaustive all-pairs distances over non-compression nodes (compression
// nodes still count as hops). `threads` == 0 picks the hardware concurrency;
// the report never depends on it.
BDReport mbd(const Topology& topo, unsigned threads = 0);

struct DegreeStats {
  Rational mean_in_degree;
  int max_in_degree = 0;
  int max_out_degree = 0;
  std::int64_t total_edges = 0;
};

DegreeStats degree_stats(const Topology& topo);

// Root key set recorded by the LogLog generator, cross-checked against a
// recomputation from L.
std::vector<NodeId> hubs(const Topology& topo);

// Known MBD upper bound of a scheme, when the construction has one.
std::optional<int> scheme_mbd_bound(const Topology& topo);

struct Prop1Report {
  int num_layers = 0;
  int num_blocks = 0;
  std::int64_t pairs_checked = 0;
  std::int64_t failures = 0;
  std::optional<std::pair<NodeId, NodeId>> first_failure;
  int min_slack = 0;  // tightest bound - BD over all pairs
  int max_slack = 0;
  bool pass = true;
};

// BD(i, j) <= ceil(log2(i - j)) + n_block for every pair i > j.
Prop1Report verify_prop1(const Topology& topo, unsigned threads = 0);

struct Prop2Row {
  int num_layers = 0;
  std::int64_t connections = 0;
  double leading_term = 0;  // 1.5 L log2 log2 L
  double residual_per_layer = 0;
  double count_bound = 0;  // leading_term + 3 L
  bool count_pass = false;
  int mbd = 0;
  int mbd_bound = 0;  // ceil(log2 log2 L) + n_block + 1
  bool mbd_pass = false;
  int mbd_without_b = 0;
  int mbd_without_b_bound = 0;  // 2 + 2 ceil(log2 log2 L) + n_block - 1
  bool without_b_pass = false;
  bool pass() const { return count_pass && mbd_pass && without_b_pass; }
};

struct Prop2Report {
  std::vector<Prop2Row> rows;
  double residual_min = 0;
  double residual_max = 0;
  bool pass = true;
};

// Coefficient of L in the allowed o(L log log L) remainder.
inline constexpr double kProp2RemainderCoefficient = 3.0;

Prop2Report verify_prop2(const std::vector<int>& layer_values, unsigned threads = 0);

// ceil(log2(log2(L))) for L >= 2; 0 for L == 2.
int ceil_log2_log2(int num_layers);

// Mean in-degree of LogLog topologies across L, plain (min_inputs = 1) and
// augmented (min_inputs = 4), checked against the expected bands.
struct DegreeSweepRow {
  int num_layers = 0;
  Rational mean_plain;
  Rational mean_augmented;
  double delta = 0;  // augmented - plain
  bool plain_in_band = false;
  std::optional<bool> delta_in_band;  // only checked up to the delta range end
};

struct DegreeSweepReport {
  std::vector<DegreeSweepRow> rows;
  int plain_failures = 0;
  int delta_failures = 0;
  bool pass = true;
};

// Bands: plain mean in [3, 4]; augmented minus plain in [1, 1.5].
inline constexpr int kAugmentedMinInputs = 4;

DegreeSweepReport loglog_degree_sweep(int first, int last, int delta_last);

struct AnalysisRow {
  std::string scheme;
  int num_layers = 0;
  int num_blocks = 0;
  std::int64_t edges = 0;
  double mean_in = 0;
  int mbd = 0;
  std::optional<int> bound;
  bool pass = true;
};

AnalysisRow analyze_row(const Topology& topo, unsigned threads = 0);
std::string analysis_csv_header();
std::string analysis_csv_row(const AnalysisRow& row);

}  // namespace logdense

#endif  // LOGDENSE_GRAPH_ANALYSIS_HPP_
