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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "logdense/graph_analysis.hpp"
#include "oracles.hpp"

namespace logdense {
namespace {

NetworkConfig small_config(int g = 12) {
  NetworkConfig cfg;
  cfg.growth_rate = g;
  cfg.input_height = cfg.input_width = 32;
  return cfg;
}

std::vector<const Step*> steps_of(const NetworkPlan& plan, StepKind kind) {
  std::vector<const Step*> out;
  for (const Step& s : plan.steps)
    if (s.kind == kind) out.push_back(&s);
  return out;
}

std::int64_t step_flops(const Step& s, const NetworkConfig& cfg) {
  std::int64_t f = 0;
  for (const Op& op : s.ops) {
    const OpCost c = op_cost(op, cfg.input_height, cfg.input_width);
    f += c.macs + c.elementwise;
  }
  return f;
}

// Reference FC-DenseNet103 count built from the block recipe: dense blocks of
// BN-ReLU-3x3 layers, BN-ReLU-1x1-maxpool down transitions, 3x3 transposed
// convs on the fresh features of the previous block, and a 1x1 head.
oracle::Cost fc_densenet_reference(int side, int g, int c0, int classes) {
  const std::vector<int> down{4, 5, 7, 10, 12};
  const int middle = 15;
  oracle::Cost total;
  auto add = [&](const oracle::Cost& c) {
    total.macs += c.macs;
    total.elementwise += c.elementwise;
    total.params += c.params;
  };
  std::int64_t hw = static_cast<std::int64_t>(side) * side;
  add({hw * 3 * c0 * 9, 0, 3 * c0 * 9});
  std::int64_t c = c0;
  std::vector<std::int64_t> skips;
  for (int n : down) {
    add(oracle::dense_block_cost(n, static_cast<int>(c), g, static_cast<int>(hw)));
    c += static_cast<std::int64_t>(n) * g;
    skips.push_back(c);
    add({hw * c * c, 2 * hw * c, c * c + 2 * c});
    hw /= 4;
  }
  add(oracle::dense_block_cost(middle, static_cast<int>(c), g, static_cast<int>(hw)));
  std::int64_t fresh = static_cast<std::int64_t>(middle) * g;
  for (int b = 4; b >= 0; --b) {
    add({hw * fresh * fresh * 9, 0, fresh * fresh * 9});
    hw *= 4;
    c = fresh + skips[b];
    add(oracle::dense_block_cost(down[b], static_cast<int>(c), g, static_cast<int>(hw)));
    fresh = static_cast<std::int64_t>(down[b]) * g;
  }
  c += fresh;
  add({hw * c * classes, 0, c * classes + classes});
  return total;
}

// ---------------------------------------------------------------------------
// op-level accounting

TEST(OpCost, PointwiseConv) {
  const Op op{OpKind::kConv, 2, 3, 1, 0, false};
  EXPECT_EQ(op_cost(op, 1, 1).macs, 6);
  EXPECT_EQ(op_params(op), 6);
}

TEST(OpCost, ThreeByThreeWeights) {
  const Op op{OpKind::kConv, 2, 3, 3, 0, false};
  EXPECT_EQ(op_params(op), 54);
  EXPECT_EQ(op_cost(op, 4, 4).macs, 16 * 54);
  EXPECT_EQ(op_params({OpKind::kConv, 2, 3, 3, 0, true}), 57);
}

TEST(OpCost, ElementwiseAndFreeOps) {
  EXPECT_EQ(op_cost({OpKind::kNorm, 5, 5, 1, 1, false}, 8, 8).elementwise, 4 * 4 * 5);
  EXPECT_EQ(op_params({OpKind::kNorm, 5, 5, 1, 0, false}), 10);
  EXPECT_EQ(op_cost({OpKind::kAvgPool, 5, 5, 2, 0, false}, 8, 8).elementwise, 64 * 5);
  EXPECT_EQ(op_cost({OpKind::kRelu, 5, 5, 1, 0, false}, 8, 8).elementwise, 0);
  EXPECT_EQ(op_params({OpKind::kMaxPool, 5, 5, 2, 0, false}), 0);
}

TEST(OpCost, TransposedConvAtInputResolution) {
  const Op op{OpKind::kTransposedConv, 4, 6, 3, 1, false};
  EXPECT_EQ(op_cost(op, 224, 224).macs, 112LL * 112 * 4 * 6 * 9);
  EXPECT_EQ(op_params(op), 4 * 6 * 9);
}

TEST(OpCost, Linear) {
  EXPECT_EQ(op_cost({OpKind::kLinear, 7, 10, 1, 3, true}, 32, 32).macs, 70);
  EXPECT_EQ(op_params({OpKind::kLinear, 7, 10, 1, 3, true}), 80);
}

// ---------------------------------------------------------------------------
// instantiation

TEST(Instantiate, DenseBlockMatchesClosedForm) {
  for (bool bottleneck : {false, true}) {
    NetworkConfig cfg = small_config(12);
    cfg.bottleneck = bottleneck;
    const NetworkPlan plan = instantiate(dense_topology(12), cfg);
    const oracle::Cost want = oracle::dense_block_cost(12, 24, 12, 32 * 32, bottleneck);
    std::int64_t macs = 0, elementwise = 0, p = 0;
    for (const Step* s : steps_of(plan, StepKind::kLayer)) {
      for (const Op& op : s->ops) {
        const OpCost c = op_cost(op, 32, 32);
        macs += c.macs;
        elementwise += c.elementwise;
        p += op_params(op);
      }
    }
    EXPECT_EQ(macs, want.macs) << bottleneck;
    EXPECT_EQ(elementwise, want.elementwise) << bottleneck;
    EXPECT_EQ(p, want.params) << bottleneck;
  }
}

TEST(Instantiate, BottleneckOpList) {
  NetworkConfig cfg = small_config(8);
  cfg.bottleneck = true;
  const NetworkPlan plan = instantiate(dense_topology(6), cfg);
  for (const Step* s : steps_of(plan, StepKind::kLayer)) {
    std::vector<std::pair<int, int>> convs;  // (kernel, out_channels)
    for (const Op& op : s->ops)
      if (op.kind == OpKind::kConv) convs.emplace_back(op.kernel, op.out_channels);
    EXPECT_EQ(convs, (std::vector<std::pair<int, int>>{{1, 32}, {3, 8}}));
  }
  for (const LayerRecord& r : plan.layers) {
    if (r.node > 0) {
      EXPECT_EQ(r.bottleneck_channels, 32);
    }
  }
}

TEST(Instantiate, HubLayersWiden) {
  NetworkConfig cfg = small_config(4);
  cfg.hub_multiplier = 3;
  const Topology topo = loglog_topology(24);
  const NetworkPlan plan = instantiate(topo, cfg);
  const auto h = hubs(topo);
  for (const LayerRecord& r : plan.layers) {
    if (r.node == 0) {
      EXPECT_EQ(r.output_channels, 8);
      continue;
    }
    const bool hub = std::find(h.begin(), h.end(), r.node) != h.end();
    EXPECT_EQ(r.output_channels, hub ? 12 : 4) << r.node;
  }
  EXPECT_TRUE(check_channel_conservation(plan, topo).empty());
}

TEST(Instantiate, V2CompressionWidth) {
  NetworkConfig cfg = small_config(16);
  cfg.compression = Compression::kV2BlockCompression;
  const Topology topo = log_dense_v2(24, {12, 12}, 16);
  const NetworkPlan plan = instantiate(topo, cfg);
  const auto comps = steps_of(plan, StepKind::kCompression);
  ASSERT_EQ(comps.size(), 1u);
  EXPECT_EQ(plan.tensors.at(comps[0]->output).channels, 74);
  EXPECT_EQ(static_cast<int>(std::ceil(16 * std::log2(24.0))), 74);
  EXPECT_TRUE(check_channel_conservation(plan, topo).empty());
}

TEST(Instantiate, ConservationHoldsAcrossSchemes) {
  NetworkConfig cfg = small_config(6);
  const std::vector<Topology> v1{
      dense_topology(15, {5, 5, 5}),   log_dense_v1(30, {10, 10, 10}),
      nearest(20, {10, 10}, Budget::kLog), evenly_spaced(20, {10, 10}, Budget::kHalf),
      nearest_half_and_log(20, {10, 10}), loglog_topology(40, {20, 20}, 4),
  };
  for (const Topology& t : v1) {
    const NetworkPlan plan = instantiate(t, cfg);
    EXPECT_TRUE(check_channel_conservation(plan, t).empty()) << scheme_name(t.scheme());
  }
  NetworkConfig v2 = cfg;
  v2.compression = Compression::kV2BlockCompression;
  const Topology t = log_dense_v2(36, {12, 12, 12}, 6);
  EXPECT_TRUE(check_channel_conservation(instantiate(t, v2), t).empty());
  NetworkConfig fc = cfg;
  fc.input_height = fc.input_width = 64;
  const Topology f = fc_log_dense_topology();
  EXPECT_TRUE(check_channel_conservation(instantiate(f, fc), f).empty());
}

TEST(Instantiate, ConservationCheckDetectsCorruption) {
  const Topology t = log_dense_v1(8);
  NetworkPlan plan = instantiate(t, small_config(4));
  const auto layers = steps_of(plan, StepKind::kLayer);
  plan.tensors.at(layers[2]->inputs.front()).channels += 1;
  EXPECT_FALSE(check_channel_conservation(plan, t).empty());
}

TEST(Instantiate, TransitionsFollowTheConsumers) {
  const Topology t = log_dense_v1(24, {8, 8, 8});
  const NetworkPlan plan = instantiate(t, small_config(4));
  EXPECT_EQ(plan.block_levels, (std::vector<int>{0, 1, 2}));
  for (const Step* s : steps_of(plan, StepKind::kTransition)) {
    const TensorInfo& in = plan.tensors.at(s->inputs.at(0));
    const TensorInfo& out = plan.tensors.at(s->output);
    EXPECT_EQ(out.level, in.level + 1);
    EXPECT_EQ(out.channels, in.channels);
    EXPECT_EQ(out.origin, in.origin);
    EXPECT_EQ(out.version, in.version + 1);
  }
  for (const LayerRecord& r : plan.layers) EXPECT_EQ(r.level, r.node == 0 ? 0 : t.node(r.node).block);
}

TEST(Instantiate, RejectsBadConfigs) {
  NetworkConfig cfg = small_config(4);
  cfg.block_sizes = {4, 4};
  EXPECT_THROW(instantiate(log_dense_v1(8, {2, 6}), cfg), ConfigError);
  NetworkConfig hub = small_config(4);
  hub.hub_multiplier = 3;
  EXPECT_THROW(instantiate(log_dense_v1(8), hub), ConfigError);
  NetworkConfig v2 = small_config(4);
  v2.compression = Compression::kV2BlockCompression;
  EXPECT_THROW(instantiate(log_dense_v1(8, {4, 4}), v2), ConfigError);
  EXPECT_THROW(instantiate(log_dense_v2(8, {4, 4}, 5), v2), ConfigError);
  NetworkConfig zero = small_config(4);
  zero.growth_rate = 0;
  EXPECT_THROW(instantiate(log_dense_v1(8), zero), ConfigError);
  NetworkConfig odd = small_config(4);
  odd.input_height = odd.input_width = 30;
  EXPECT_THROW(instantiate(log_dense_v1(12, {4, 4, 4}), odd), ConfigError);
  NetworkConfig fc = small_config(4);
  fc.block_sizes = {2, 2};
  EXPECT_THROW(fc_plan(fc), ConfigError);
}

// ---------------------------------------------------------------------------
// reports

TEST(Flops, TotalsAreSumsOfParts) {
  NetworkConfig cfg = small_config(8);
  const NetworkPlan plan = instantiate(log_dense_v1(30, {10, 10, 10}), cfg);
  const CostReport r = flops(plan, cfg);
  EXPECT_EQ(std::accumulate(r.per_block_flops.begin(), r.per_block_flops.end(), std::int64_t{0}),
            r.total_flops);
  EXPECT_EQ(r.total_flops, r.conv_macs + r.elementwise_ops);
  EXPECT_EQ(r.total_params, params(plan));
  EXPECT_EQ(r.per_layer_flops.size(), 30u);
  NetworkConfig x2 = cfg;
  x2.flop_convention = FlopConvention::kMACx2;
  const CostReport d = flops(plan, x2);
  EXPECT_EQ(d.total_flops, 2 * r.conv_macs + r.elementwise_ops);
  EXPECT_FALSE(d.assumptions.empty());
}

TEST(Flops, ScalesWithPixelCount) {
  NetworkConfig cfg = small_config(6);
  cfg.head = HeadKind::kPixelwise;
  const Topology t = loglog_topology(20, {10, 10});
  const CostReport a = flops(instantiate(t, cfg), cfg);
  NetworkConfig big = cfg;
  big.input_height = big.input_width = 64;
  const CostReport b = flops(instantiate(t, big), big);
  EXPECT_EQ(b.conv_macs, 4 * a.conv_macs);
  EXPECT_EQ(b.total_flops, 4 * a.total_flops);
  EXPECT_EQ(b.total_params, a.total_params);
}

TEST(Flops, V1BoundaryCostIsLinearInLiveLayers) {
  // Dense connectivity keeps every earlier layer live. With x_0 at g channels
  // each live producer costs the same to carry across the boundary.
  std::int64_t unit = -1;
  for (int n : {3, 5, 9, 17}) {
    NetworkConfig cfg = small_config(4);
    cfg.initial_channels = 4;
    const NetworkPlan plan = instantiate(dense_topology(2 * n, {n, n}), cfg);
    const CostReport r = flops(plan, cfg);
    const std::int64_t live = n + 1;
    if (unit < 0) unit = r.per_boundary_transition_flops[0] / live;
    EXPECT_EQ(r.per_boundary_transition_flops[0], live * unit) << n;
    EXPECT_EQ(static_cast<std::int64_t>(steps_of(plan, StepKind::kTransition).size()), live);
  }
}

TEST(Flops, V2TransitionGrowth) {
  // Growth exponents of compression cost and older-stack re-transform cost
  // fitted over a sweep of L with three blocks.
  const int g = 4;
  std::vector<double> ls, comp, stack;
  for (int L : {48, 96, 192, 384, 768, 1536}) {
    NetworkConfig cfg = small_config(g);
    cfg.compression = Compression::kV2BlockCompression;
    cfg.input_height = cfg.input_width = 8;
    const std::vector<int> blocks{L / 3, L / 3, L / 3};
    const NetworkPlan plan = instantiate(log_dense_v2(L, blocks, g), cfg);
    std::int64_t c = 0, s = 0;
    for (const Step& st : plan.steps) {
      if (st.block != 1) continue;
      if (st.kind == StepKind::kCompression) c += step_flops(st, cfg);
      if (st.kind == StepKind::kStackTransform) s += step_flops(st, cfg);
    }
    ls.push_back(L);
    comp.push_back(static_cast<double>(c));
    stack.push_back(static_cast<double>(s));
  }
  auto slope = [&](const std::vector<double>& y, const std::function<double(double)>& f) {
    const std::size_t n = ls.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double x = std::log(ls[k]);
      const double v = std::log(y[k] / f(ls[k]));
      sx += x;
      sy += v;
      sxx += x * x;
      sxy += x * v;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  // cost / (L log L) and cost / log^2 L should be flat in L
  EXPECT_NEAR(slope(comp, [](double L) { return L * std::log2(L); }), 0.0, 0.1);
  EXPECT_NEAR(slope(stack, [](double L) { return std::log2(L) * std::log2(L); }), 0.0, 0.15);
  EXPECT_GT(slope(comp, [](double) { return 1.0; }), 1.0);
}

TEST(Distribution, FractionsSumToOne) {
  NetworkConfig cfg = small_config(8);
  const CostReport r = flops(instantiate(log_dense_v1(30, {10, 10, 10}), cfg), cfg);
  const auto f = block_cost_distribution(r);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_NEAR(std::accumulate(f.begin(), f.end(), 0.0), 1.0, 1e-9);
  for (double x : f) EXPECT_GE(x, 0.0);
}

TEST(Distribution, UniformToyPlan) {
  NetworkPlan plan;
  plan.block_levels = {0, 0, 0, 0};
  plan.tensors.push_back({3, 0, -1, 0});
  for (int b = 0; b < 4; ++b) {
    Step s;
    s.kind = StepKind::kLayer;
    s.block = b;
    s.ops = {{OpKind::kNorm, 3, 3, 1, 0, false}, {OpKind::kConv, 3, 3, 3, 0, false}};
    plan.steps.push_back(s);
  }
  NetworkConfig cfg = small_config(3);
  const auto f = block_cost_distribution(flops(plan, cfg));
  for (double x : f) EXPECT_DOUBLE_EQ(x, 0.25);
}

// ---------------------------------------------------------------------------
// fully convolutional presets

TEST(FcPlan, StructureAndHeads) {
  NetworkConfig cfg = fc_logdense103_config();
  const NetworkPlan plan = fc_plan(cfg);
  EXPECT_EQ(plan.name, "FC-LogDenseNetV1-103");
  EXPECT_EQ(plan.block_levels, (std::vector<int>{0, 1, 2, 3, 4, 5, 4, 3, 2, 1, 0}));
  EXPECT_EQ(plan.head_steps.size(), 11u);
  EXPECT_TRUE(plan.steps.at(plan.head_steps.back()).final_head);
  EXPECT_EQ(plan.head_kind, HeadKind::kPixelwise);
  int feature_layers = 0;
  for (const LayerRecord& r : plan.layers) feature_layers += r.node > 0;
  EXPECT_EQ(feature_layers, 91);
  EXPECT_FALSE(steps_of(plan, StepKind::kTransition).empty());
  int up = 0;
  for (const Step* s : steps_of(plan, StepKind::kTransition))
    for (const Op& op : s->ops) up += op.kind == OpKind::kTransposedConv;
  EXPECT_GT(up, 0);
  for (int h : plan.head_steps) {
    const Step& s = plan.steps.at(h);
    EXPECT_EQ(plan.tensors.at(s.output).level, plan.block_levels.at(s.block));
    EXPECT_EQ(plan.tensors.at(s.output).channels, 11);
  }
}

TEST(FcPlan, LazyTransitionsOnlyCarryConsumedLayers) {
  NetworkConfig cfg = fc_logdense103_config();
  cfg.input_height = cfg.input_width = 64;
  const Topology topo = fc_log_dense_topology();
  const NetworkPlan lazy = fc_plan(cfg);
  cfg.lazy_transitions = false;
  const NetworkPlan eager = instantiate(topo, cfg);
  EXPECT_LT(steps_of(lazy, StepKind::kTransition).size(), steps_of(eager, StepKind::kTransition).size());
  // every lazy transition output is eventually read
  std::vector<int> reads(lazy.tensors.size(), 0);
  for (const Step& s : lazy.steps)
    for (int t : s.inputs) ++reads[t];
  for (const Step* s : steps_of(lazy, StepKind::kTransition)) EXPECT_GT(reads[s->output], 0);
}

TEST(FcPlan, FinalBlocksDominateCost) {
  const NetworkConfig cfg = fc_logdense103_config();
  const auto f = block_cost_distribution(flops(fc_plan(cfg), cfg));
  ASSERT_EQ(f.size(), 11u);
  EXPECT_GE(f[9] + f[10], 0.45);
  for (std::size_t b = 6; b < 11; ++b) EXPECT_GT(f[b], f[b - 1]) << b;
}

TEST(FcPlan, PresetTotals) {
  // frozen from the plan; the tolerance checks against the published
  // numbers live in the acceptance suite
  const NetworkConfig a = fc_logdense103_config();
  const CostReport ra = flops(fc_plan(a), a);
  EXPECT_EQ(ra.total_params, 4409665);
  const NetworkConfig b = fc_densenet103_config();
  const CostReport rb = flops(fc_densenet103_plan(b), b);
  const oracle::Cost ref = fc_densenet_reference(224, 16, 48, 11);
  EXPECT_EQ(rb.total_params, ref.params);
  EXPECT_EQ(rb.conv_macs, ref.macs);
  EXPECT_EQ(rb.elementwise_ops, ref.elementwise);
}

TEST(Serialization, CsvAndJson) {
  const NetworkConfig cfg = fc_logdense103_config();
  const NetworkPlan plan = fc_plan(cfg);
  const CostReport r = flops(plan, cfg);
  EXPECT_EQ(cost_csv_header(), "architecture,gflops,params_m,convention\n");
  const std::string row = cost_csv_row(plan.name, r);
  EXPECT_EQ(row.rfind("FC-LogDenseNetV1-103,", 0), 0u);
  EXPECT_NE(row.find(",MACx2"), std::string::npos);
  const std::string json = cost_report_json(r, plan);
  EXPECT_NE(json.find("\"total_params\""), std::string::npos);
  EXPECT_EQ(json, cost_report_json(flops(fc_plan(cfg), cfg), fc_plan(cfg)));
}

}  // namespace
}  // namespace logdense
