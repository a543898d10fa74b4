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

#include "logdense/graph_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

namespace logdense {

Rational Rational::of(std::int64_t num, std::int64_t den) {
  if (den == 0) return {0, 1};
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

std::vector<int> distances_from(const Topology& topo, NodeId source) {
  const int n = topo.num_nodes();
  if (source < 0 || source >= n) throw ConfigError("node out of range");
  std::vector<int> dist(n, -1);
  std::vector<NodeId> queue{source};
  queue.reserve(n);
  dist[source] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    for (NodeId v : topo.inputs(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

std::optional<int> backprop_distance(const Topology& topo, BDQuery q) {
  if (q.to < 0 || q.from >= topo.num_nodes() || q.from <= q.to) {
    throw ConfigError("backprop distance needs from > to, both existing nodes");
  }
  const int d = distances_from(topo, q.from)[q.to];
  if (d < 0) return std::nullopt;
  return d;
}

namespace {

unsigned resolve_threads(unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return threads;
}

// Runs `body(source)` for every source, split round-robin across threads.
// Each source writes only its own slot, so results are order independent.
template <typename Body>
void for_each_source(int n, unsigned threads, Body body) {
  threads = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(std::max(n, 1)));
  if (threads <= 1) {
    for (int s = 0; s < n; ++s) body(s);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int s = static_cast<int>(t); s < n; s += static_cast<int>(threads)) body(s);
    });
  }
  for (auto& th : pool) th.join();
}

bool is_feature_like(const Topology& topo, NodeId id) {
  return topo.node(id).kind != NodeKind::kCompression;
}

}  // namespace

BDReport mbd(const Topology& topo, unsigned threads) {
  const int n = topo.num_nodes();
  struct Row {
    int max = 0;
    NodeId witness = -1;
    std::vector<std::int64_t> hist;
    std::int64_t unreachable = 0;
  };
  std::vector<Row> rows(n);
  for_each_source(n, threads, [&](int i) {
    if (!is_feature_like(topo, i)) return;
    const auto dist = distances_from(topo, i);
    Row& row = rows[i];
    for (NodeId j = 0; j < i; ++j) {
      if (!is_feature_like(topo, j)) continue;
      const int d = dist[j];
      if (d < 0) {
        ++row.unreachable;
        continue;
      }
      if (static_cast<int>(row.hist.size()) <= d) row.hist.resize(d + 1, 0);
      ++row.hist[d];
      if (d > row.max) {
        row.max = d;
        row.witness = j;
      }
    }
  });

  BDReport report;
  std::int64_t pairs = 0;
  std::int64_t total = 0;
  for (NodeId i = 0; i < n; ++i) {
    const Row& row = rows[i];
    for (int d = 0; d < static_cast<int>(row.hist.size()); ++d) {
      if (row.hist[d] == 0) continue;
      report.distance_histogram[d] += row.hist[d];
      pairs += row.hist[d];
      total += row.hist[d] * d;
    }
    report.unreachable_pairs += row.unreachable;
    if (row.witness >= 0 && row.max > report.mbd) {
      report.mbd = row.max;
      report.witness_pair = {i, row.witness};
    }
  }
  report.mean_bd = Rational::of(total, pairs);
  return report;
}

DegreeStats degree_stats(const Topology& topo) {
  DegreeStats s;
  std::vector<int> out(topo.num_nodes(), 0);
  for (const Node& nd : topo.nodes()) {
    const auto& in = topo.inputs(nd.id);
    s.total_edges += static_cast<std::int64_t>(in.size());
    s.max_in_degree = std::max(s.max_in_degree, static_cast<int>(in.size()));
    for (NodeId p : in) ++out[p];
  }
  s.max_out_degree = *std::max_element(out.begin(), out.end());
  s.mean_in_degree = Rational::of(s.total_edges, topo.num_nodes() - 1);
  return s;
}

std::vector<NodeId> hubs(const Topology& topo) {
  if (topo.scheme() != Scheme::kLogLog) {
    throw ConfigError("hubs are only defined for LogLog topologies");
  }
  const auto recorded = topo.list_param("hubs");
  const auto expected = lglg_root_keys(topo.num_layers());
  if (!recorded) throw ConfigError("LogLog topology is missing its hub set");
  std::vector<NodeId> out(recorded->begin(), recorded->end());
  if (out != expected) throw ConfigError("recorded hub set disagrees with the construction");
  return out;
}

int ceil_log2_log2(int num_layers) {
  if (num_layers < 2) throw ConfigError("log2 log2 L needs L >= 2");
  // smallest c with 2^(2^c) >= L
  int c = 0;
  while (c < 5 && (std::int64_t{1} << (1 << c)) < num_layers) ++c;
  return c;
}

std::optional<int> scheme_mbd_bound(const Topology& topo) {
  const int nb = topo.num_blocks();
  const int L = topo.num_layers();
  switch (topo.scheme()) {
    case Scheme::kDense:
      return 1;
    case Scheme::kLogDenseV1:
      return ceil_log2(L) + nb;
    case Scheme::kLogDenseV2: {
      const int largest = *std::max_element(topo.block_sizes().begin(), topo.block_sizes().end());
      return std::max(ceil_log2(largest) + 1, nb);
    }
    case Scheme::kLogLog:
      return L < 2 ? 1 : ceil_log2_log2(L) + nb + 1;
    case Scheme::kNearestHalfAndLog:
      return std::min(L, 2);
    case Scheme::kEvenlySpaced:
      if (topo.string_param("budget") == "half") return std::min(L, 2);
      return std::nullopt;
    case Scheme::kFCLogDense:
      // Eq.-2 edges over global indices; transitions are not graph hops.
      return ceil_log2(L) + 1;
    case Scheme::kNearest:
      return std::nullopt;
  }
  return std::nullopt;
}

Prop1Report verify_prop1(const Topology& topo, unsigned threads) {
  if (topo.scheme() != Scheme::kLogDenseV1) {
    throw ConfigError("proposition 1 applies to Log-DenseNet V1 topologies");
  }
  const int n = topo.num_nodes();
  const int nb = topo.num_blocks();
  struct Row {
    std::int64_t pairs = 0;
    std::int64_t failures = 0;
    NodeId first_fail = -1;
    int min_slack = 1 << 30;
    int max_slack = -(1 << 30);
  };
  std::vector<Row> rows(n);
  for_each_source(n, threads, [&](int i) {
    const auto dist = distances_from(topo, i);
    Row& row = rows[i];
    for (NodeId j = 0; j < i; ++j) {
      const int bound = ceil_log2(i - j) + nb;
      const int d = dist[j];
      ++row.pairs;
      if (d < 0 || d > bound) {
        if (row.failures++ == 0) row.first_fail = j;
        continue;
      }
      row.min_slack = std::min(row.min_slack, bound - d);
      row.max_slack = std::max(row.max_slack, bound - d);
    }
  });
  Prop1Report rep;
  rep.num_layers = topo.num_layers();
  rep.num_blocks = nb;
  bool any = false;
  for (NodeId i = 0; i < n; ++i) {
    const Row& row = rows[i];
    rep.pairs_checked += row.pairs;
    rep.failures += row.failures;
    if (row.failures > 0 && !rep.first_failure) rep.first_failure = {{i, row.first_fail}};
    if (row.pairs > row.failures) {
      rep.min_slack = any ? std::min(rep.min_slack, row.min_slack) : row.min_slack;
      rep.max_slack = any ? std::max(rep.max_slack, row.max_slack) : row.max_slack;
      any = true;
    }
  }
  rep.pass = rep.failures == 0;
  return rep;
}

Prop2Report verify_prop2(const std::vector<int>& layer_values, unsigned threads) {
  if (layer_values.empty()) throw ConfigError("proposition 2 sweep needs at least one L");
  Prop2Report rep;
  for (int L : layer_values) {
    if (L < 2) throw ConfigError("proposition 2 sweep needs L >= 2");
    Prop2Row row;
    row.num_layers = L;
    const Topology topo = loglog_topology(L, {}, 1, true);
    row.connections = topo.num_edges();
    const double loglog = std::log2(std::log2(static_cast<double>(L)));
    row.leading_term = 1.5 * L * loglog;
    row.residual_per_layer = (static_cast<double>(row.connections) - row.leading_term) / L;
    row.count_bound = row.leading_term + kProp2RemainderCoefficient * L;
    row.count_pass = static_cast<double>(row.connections) <= row.count_bound;

    const int cll = ceil_log2_log2(L);
    const int nb = topo.num_blocks();
    row.mbd = mbd(topo, threads).mbd;
    row.mbd_bound = cll + nb + 1;
    row.mbd_pass = row.mbd <= row.mbd_bound;

    const Topology no_b = loglog_topology(L, {}, 1, false);
    row.mbd_without_b = mbd(no_b, threads).mbd;
    row.mbd_without_b_bound = 2 + 2 * cll + nb - 1;
    row.without_b_pass = row.mbd_without_b <= row.mbd_without_b_bound;
    rep.rows.push_back(row);
  }
  rep.residual_min = rep.residual_max = rep.rows.front().residual_per_layer;
  for (const auto& r : rep.rows) {
    rep.residual_min = std::min(rep.residual_min, r.residual_per_layer);
    rep.residual_max = std::max(rep.residual_max, r.residual_per_layer);
    rep.pass = rep.pass && r.pass();
  }
  return rep;
}

DegreeSweepReport loglog_degree_sweep(int first, int last, int delta_last) {
  if (first < 2 || last < first) throw ConfigError("degree sweep needs 2 <= first <= last");
  DegreeSweepReport rep;
  for (int L = first; L <= last; ++L) {
    // mean in-degree = edges / L; bands are compared on integers
    const std::int64_t plain = loglog_topology(L, {}, 1, true).num_edges();
    const std::int64_t augmented = loglog_topology(L, {}, kAugmentedMinInputs, true).num_edges();
    DegreeSweepRow row;
    row.num_layers = L;
    row.mean_plain = Rational::of(plain, L);
    row.mean_augmented = Rational::of(augmented, L);
    row.delta = static_cast<double>(augmented - plain) / L;
    row.plain_in_band = plain >= 3 * std::int64_t{L} && plain <= 4 * std::int64_t{L};
    if (L <= delta_last) {
      const std::int64_t twice = 2 * (augmented - plain);
      row.delta_in_band = twice >= 2 * std::int64_t{L} && twice <= 3 * std::int64_t{L};
      if (!*row.delta_in_band) ++rep.delta_failures;
    }
    if (!row.plain_in_band) ++rep.plain_failures;
    rep.rows.push_back(row);
  }
  rep.pass = rep.plain_failures == 0 && rep.delta_failures == 0;
  return rep;
}

namespace {
std::string display_scheme(const Topology& topo) {
  std::string name = scheme_name(topo.scheme());
  if (auto budget = topo.string_param("budget")) name += "(" + *budget + ")";
  if (topo.scheme() == Scheme::kLogLog) {
    name += "(min_inputs=" + std::to_string(topo.int_param("min_inputs").value_or(1)) + ")";
  }
  return name;
}
}  // namespace

AnalysisRow analyze_row(const Topology& topo, unsigned threads) {
  AnalysisRow row;
  row.scheme = display_scheme(topo);
  row.num_layers = topo.num_layers();
  row.num_blocks = topo.num_blocks();
  const auto deg = degree_stats(topo);
  row.edges = deg.total_edges;
  row.mean_in = deg.mean_in_degree.value();
  const auto rep = mbd(topo, threads);
  row.mbd = rep.mbd;
  row.bound = scheme_mbd_bound(topo);
  row.pass = rep.unreachable_pairs == 0 && (!row.bound || row.mbd <= *row.bound);
  return row;
}

std::string analysis_csv_header() { return "scheme,L,n_block,edges,mean_in,mbd,bound,pass\n"; }

std::string analysis_csv_row(const AnalysisRow& row) {
  char mean[32];
  std::snprintf(mean, sizeof mean, "%.6f", row.mean_in);
  std::string out = row.scheme + "," + std::to_string(row.num_layers) + "," +
                    std::to_string(row.num_blocks) + "," + std::to_string(row.edges) + "," +
                    mean + "," + std::to_string(row.mbd) + ",";
  if (row.bound) out += std::to_string(*row.bound);
  out += row.pass ? ",true\n" : ",false\n";
  return out;
}

}  // namespace logdense
