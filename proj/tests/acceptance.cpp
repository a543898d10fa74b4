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

// Acceptance checks. Usage: acceptance [N ...]   (no arguments: all nine)
// Prints one PASS/FAIL line per criterion; exit status 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "logdense/cli.hpp"
#include "logdense/cost_model.hpp"
#include "logdense/graph_analysis.hpp"
#include "logdense/micronet.hpp"
#include "logdense/topology.hpp"

namespace {

using namespace logdense;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<int> even_blocks(int layers, int count) {
  std::vector<int> blocks(count, layers / count);
  for (int b = 0; b < layers % count; ++b) ++blocks[b];
  return blocks;
}

int ceil_log2_log2_reference(int L) {
  return static_cast<int>(std::ceil(std::log2(std::log2(static_cast<double>(L))) - 1e-12));
}

// 1. log-distance bound of Log-DenseNet V1, all pairs
Outcome distance_bound_v1() {
  bool pass = true;
  std::ostringstream d;
  double seconds_1024 = 0.0;
  for (int L : {16, 64, 256, 1024}) {
    for (int nb = 1; nb <= 4; ++nb) {
      const Topology t = log_dense_v1(L, even_blocks(L, nb));
      const auto start = std::chrono::steady_clock::now();
      // each pair checked against ceil(log2|i-j|) + n_block directly
      std::int64_t failures = 0;
      for (NodeId i = 1; i < t.num_nodes(); ++i) {
        const auto dist = distances_from(t, i);
        for (NodeId j = 0; j < i; ++j) {
          if (dist[j] < 0 || dist[j] > ceil_log2(i - j) + nb) ++failures;
        }
      }
      const double s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (L == 1024 && nb == 1) seconds_1024 = s;
      const Prop1Report r = verify_prop1(t);
      if (failures != 0 || !r.pass) {
        pass = false;
        d << " L=" << L << "/" << nb << " blocks: " << failures << " failing pairs;";
      }
    }
  }
  if (seconds_1024 >= 60.0) pass = false;
  d << " L in {16,64,256,1024} x n_block 1..4 exhaustive; L=1024 single block took "
    << fmt("%.2f", seconds_1024) << " s";
  return {pass, d.str()};
}

// 2. LogLog connection count and MBD
Outcome loglog_sweep() {
  bool pass = true;
  std::ostringstream d;
  const std::vector<int> Ls{16, 64, 256, 1024, 4096};
  for (int L : Ls) {
    const Topology t = loglog_topology(L);
    const std::int64_t e = t.num_edges();
    const double cap = 1.5 * L * std::log2(std::log2(static_cast<double>(L))) + 3.0 * L;
    const int m = mbd(t).mbd;
    const int bound = ceil_log2_log2_reference(L) + 1 + 1;
    const bool ok = static_cast<double>(e) <= cap && m <= bound;
    pass = pass && ok;
    d << " L=" << L << ": edges " << e << " <= " << fmt("%.1f", cap) << ", MBD " << m
      << " <= " << bound << (ok ? ";" : " FAILED;");
  }
  return {pass, d.str()};
}

// 3. mean in-degree bands of LogLog
Outcome loglog_degree_bands() {
  int plain_failures = 0, delta_failures = 0;
  int first_plain = -1, first_delta = -1;
  double plain_lo = 1e9, plain_hi = 0, delta_lo = 1e9, delta_hi = 0;
  for (int L = 16; L <= 2000; ++L) {
    const std::int64_t e1 = loglog_topology(L).num_edges();
    plain_lo = std::min(plain_lo, static_cast<double>(e1) / L);
    plain_hi = std::max(plain_hi, static_cast<double>(e1) / L);
    // 3 <= e1 / L <= 4 in exact integers
    if (!(3LL * L <= e1 && e1 <= 4LL * L)) {
      ++plain_failures;
      if (first_plain < 0) first_plain = L;
    }
    if (L <= 1700) {
      const std::int64_t e4 = loglog_topology(L, {}, 4).num_edges();
      const std::int64_t diff = e4 - e1;
      delta_lo = std::min(delta_lo, static_cast<double>(diff) / L);
      delta_hi = std::max(delta_hi, static_cast<double>(diff) / L);
      // 1 <= diff / L <= 1.5
      if (!(2LL * L <= 2 * diff && 2 * diff <= 3LL * L)) {
        ++delta_failures;
        if (first_delta < 0) first_delta = L;
      }
    }
  }
  // cross-check the library sweep gives the same verdicts
  const DegreeSweepReport sweep = loglog_degree_sweep(16, 2000, 1700);
  const bool consistent =
      sweep.plain_failures == plain_failures && sweep.delta_failures == delta_failures;
  std::ostringstream d;
  d << " mean in-degree (min_inputs=1) over L=16..2000 spans [" << fmt("%.4f", plain_lo) << ", "
    << fmt("%.4f", plain_hi) << "], " << plain_failures << "/1985 outside [3,4]";
  if (first_plain >= 0) d << " (first L=" << first_plain << ")";
  d << "; min_inputs=4 increase over L=16..1700 spans [" << fmt("%.4f", delta_lo) << ", "
    << fmt("%.4f", delta_hi) << "], " << delta_failures << "/1685 outside [1,1.5]";
  if (first_delta >= 0) d << " (first L=" << first_delta << ")";
  if (!consistent) d << "; library sweep disagrees";
  return {plain_failures == 0 && delta_failures == 0 && consistent, d.str()};
}

// 4. Table 2 cost figures
Outcome table2_costs() {
  struct Row {
    std::string name;
    CostReport report;
    double params_target, flops_target;
  };
  const NetworkConfig a = fc_logdense103_config();
  const NetworkConfig b = fc_densenet103_config();
  const std::vector<Row> rows{
      {"FC-LogDenseNetV1-103", flops(fc_plan(a), a), 4.7e6, 42.0e9},
      {"FC-DenseNet103", flops(fc_densenet103_plan(b), b), 9.4e6, 39.4e9},
  };
  bool pass = true;
  std::ostringstream d;
  for (const Row& r : rows) {
    const double p = static_cast<double>(r.report.total_params);
    const double f = static_cast<double>(r.report.total_flops);
    const bool ok = std::abs(p - r.params_target) <= 0.10 * r.params_target &&
                    std::abs(f - r.flops_target) <= 0.20 * r.flops_target;
    pass = pass && ok;
    d << " " << r.name << ": " << fmt("%.3f", p / 1e6) << " M params (target "
      << fmt("%.1f", r.params_target / 1e6) << " +-10%), " << fmt("%.3f", f / 1e9)
      << " GFLOPs (target " << fmt("%.1f", r.flops_target / 1e9) << " +-20%)"
      << (ok ? ";" : " FAILED;");
  }
  d << " convention " << flop_convention_name(rows[0].report.convention) << "; assumptions:";
  for (const std::string& s : rows[0].report.assumptions) d << " [" << s << "]";
  return {pass, d.str()};
}

// 5. cost share of the final two blocks
Outcome final_blocks_share() {
  const NetworkConfig cfg = fc_logdense103_config();
  const auto f = block_cost_distribution(flops(fc_plan(cfg), cfg));
  const double share = f.at(f.size() - 2) + f.back();
  return {share >= 0.45, " final two of " + std::to_string(f.size()) + " blocks carry " +
                             fmt("%.4f", share) + " of FLOPs (need >= 0.45)"};
}

// 6. MBD ordering of the connection schemes at L=64
Outcome scheme_ordering() {
  const int v1 = mbd(log_dense_v1(64)).mbd;
  const int near_log = mbd(nearest(64, {}, Budget::kLog)).mbd;
  const int even_log = mbd(evenly_spaced(64, {}, Budget::kLog)).mbd;
  const int even_half = mbd(evenly_spaced(64, {}, Budget::kHalf)).mbd;
  const int nhl = mbd(nearest_half_and_log(64)).mbd;
  const int near_half = mbd(nearest(64, {}, Budget::kHalf)).mbd;
  const bool pass = v1 < near_log && v1 < even_log && even_half == 2 && nhl == 2 && 2 < near_half;
  std::ostringstream d;
  d << " log budget: V1 " << v1 << ", nearest " << near_log << ", evenly-spaced " << even_log
    << "; half budget: evenly-spaced " << even_half << ", nearest-half-and-log " << nhl
    << ", nearest " << near_half;
  return {pass, d.str()};
}

// 7. analytic vs finite-difference gradients for every scheme
Outcome gradient_checks() {
  struct Case {
    std::string label;
    Topology topo;
    NetworkConfig cfg;
  };
  auto cfg = [](int side, bool bottleneck = false) {
    NetworkConfig c;
    c.growth_rate = 2;
    c.input_height = c.input_width = side;
    c.num_classes = 3;
    c.bottleneck = bottleneck;
    return c;
  };
  auto v2 = [&](int side) {
    NetworkConfig c = cfg(side);
    c.compression = Compression::kV2BlockCompression;
    return c;
  };
  auto hubbed = [&](int side, int mult) {
    NetworkConfig c = cfg(side);
    c.hub_multiplier = mult;
    return c;
  };
  const std::vector<Case> cases{
      {"dense", dense_topology(16), cfg(4)},
      {"dense 2 blocks bottleneck", dense_topology(16, {8, 8}), cfg(4, true)},
      {"logdense-v1", log_dense_v1(16), cfg(4)},
      {"logdense-v1 3 blocks", log_dense_v1(15, {5, 5, 5}), cfg(4)},
      {"logdense-v2 2 blocks", log_dense_v2(16, {8, 8}, 2), v2(4)},
      {"logdense-v2 3 blocks", log_dense_v2(15, {5, 5, 5}, 2), v2(4)},
      {"loglog hub x1", loglog_topology(16), hubbed(4, 1)},
      {"loglog hub x3", loglog_topology(16), hubbed(4, 3)},
      {"loglog hub x3 min_inputs 4 2 blocks", loglog_topology(16, {8, 8}, 4), hubbed(4, 3)},
      {"nearest log", nearest(16, {}, Budget::kLog), cfg(4)},
      {"nearest half", nearest(16, {}, Budget::kHalf), cfg(4)},
      {"evenly-spaced log", evenly_spaced(16, {}, Budget::kLog), cfg(4)},
      {"evenly-spaced half", evenly_spaced(16, {}, Budget::kHalf), cfg(4)},
      {"nearest-half-and-log", nearest_half_and_log(16), cfg(4)},
      {"fc-logdense 2+3+4+3+2", fc_log_dense_topology({2, 3, 4, 3, 2}), cfg(8)},
  };
  bool pass = true;
  double worst = 0.0;
  std::string worst_label;
  int kinks = 0, probes = 0;
  std::ostringstream failures;
  for (const Case& c : cases) {
    const MicroModel m = build(c.topo, c.cfg, 1);
    const Batch batch = synthetic_batch(m, 2, 2);
    const GradCheckReport r = grad_check(m, batch, {}, 1e-4, 200, 3);
    const bool ok = r.max_rel_err < 1e-4;
    pass = pass && ok;
    kinks += r.kink_crossings;
    probes += r.checked;
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      worst_label = c.label;
    }
    if (!ok) failures << " " << c.label << " (" << fmt("%.3g", r.max_rel_err) << ")";
  }
  std::ostringstream d;
  d << " " << cases.size() << " models at L <= 16, " << probes
    << " probes at epsilon 1e-4, worst relative error " << fmt("%.3g", worst) << " (" << worst_label
    << "), " << kinks << " probes re-evaluated on the unperturbed ReLU/max-pool pattern";
  if (!pass) d << "; failing:" << failures.str();
  return {pass, d.str()};
}

// 8. micronet parameter count vs cost model
Outcome parameter_equivalence() {
  std::mt19937_64 rng(8);
  int checked = 0, mismatches = 0;
  while (checked < 24) {
    const int nb = 1 + static_cast<int>(rng() % 4);
    const int per = 1 + static_cast<int>(rng() % 8);
    const int L = nb * per;
    NetworkConfig cfg;
    cfg.growth_rate = 1 + static_cast<int>(rng() % 8);
    cfg.input_height = cfg.input_width = 8;
    cfg.num_classes = 2 + static_cast<int>(rng() % 9);
    cfg.bottleneck = rng() % 2 == 0;
    cfg.deep_supervision = rng() % 4 != 0;
    Topology t;
    const int kind = static_cast<int>(rng() % 8);
    const std::vector<int> blocks(nb, per);
    if (kind == 2 && nb < 2) continue;
    if (kind == 7 && (nb % 2 == 0 || nb > 3)) continue;
    switch (kind) {
      case 0: t = dense_topology(L, blocks); break;
      case 1: t = log_dense_v1(L, blocks); break;
      case 2:
        t = log_dense_v2(L, blocks, cfg.growth_rate);
        cfg.compression = Compression::kV2BlockCompression;
        break;
      case 3:
        t = loglog_topology(L, blocks, 1 + static_cast<int>(rng() % 4));
        cfg.hub_multiplier = 1 + static_cast<int>(rng() % 3);
        break;
      case 4: t = nearest(L, blocks, rng() % 2 ? Budget::kLog : Budget::kHalf); break;
      case 5: t = evenly_spaced(L, blocks, rng() % 2 ? Budget::kLog : Budget::kHalf); break;
      case 6: t = nearest_half_and_log(L, blocks); break;
      default: t = fc_log_dense_topology(blocks); break;
    }
    const MicroModel m = build(t, cfg, rng());
    std::int64_t counted = 0;
    for (const ParamArray& p : m.params) counted += static_cast<std::int64_t>(p.value.size());
    if (counted != params(instantiate(t, cfg))) ++mismatches;
    ++checked;
  }
  return {checked >= 10 && mismatches == 0,
          " " + std::to_string(checked) + " randomized desk-scale configs, " +
              std::to_string(mismatches) + " parameter count mismatches"};
}

// 9. byte-identical CLI reruns
Outcome cli_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "logdense_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const std::string topo = (dir / "topo.json").string();
  std::ostringstream sink;
  run_cli({"generate", "--scheme", "loglog", "-L", "40", "-o", topo}, sink, sink);
  const std::vector<std::vector<std::string>> commands{
      {"generate", "--scheme", "logdense-v1", "-L", "64", "--blocks", "32,32"},
      {"generate", "--scheme", "fc-logdense", "--format", "dot"},
      {"render", topo},
      {"render", topo, "--format", "pgm"},
      {"render", topo, "--format", "pgm-raw", "--cell", "3"},
      {"analyze", topo},
      {"analyze", "--scheme", "evenly-spaced", "-L", "64", "--budget", "half", "--format", "csv"},
      {"cost", "--preset", "table2"},
      {"cost", "--preset", "fc-logdense-103", "--format", "json"},
      {"cost", "--scheme", "logdense-v2", "-L", "24", "--blocks", "12,12", "-g", "16",
       "--format", "csv", "--blocks-report"},
      {"verify", "--prop1", "-L", "16,64", "--num-blocks", "1,2"},
      {"verify", "--prop2", "-L", "16,64,256"},
      {"verify", "--fig6a", "--from", "16", "--to", "64", "--delta-to", "64"},
      {"gradcheck", "--scheme", "loglog", "-L", "12", "--hub-multiplier", "3", "--seed", "4"},
      {"train", "--scheme", "logdense-v1", "-L", "8", "--steps", "20", "--seed", "4"},
  };
  int mismatches = 0;
  std::string failed;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    std::vector<std::string> args = commands[k];
    const std::string out = (dir / ("run" + std::to_string(k))).string();
    args.push_back("-o");
    args.push_back(out);
    std::ostringstream e1, e2, o1, o2;
    const int c1 = run_cli(args, o1, e1);
    const std::string body1 = slurp(out);
    const std::string man1 = slurp(out + ".manifest.json");
    const int c2 = run_cli(args, o2, e2);
    const std::string body2 = slurp(out);
    const std::string man2 = slurp(out + ".manifest.json");
    bool ok = c1 == c2 && c1 != kExitUsage && !body1.empty() && body1 == body2 && man1 == man2;
    if (ok) {
      const auto doc = nlohmann::json::parse(man2);
      ok = doc["output_digests"][out] == sha256_hex(body2);
    }
    if (!ok) {
      ++mismatches;
      failed += " " + commands[k][0];
    }
  }
  fs::remove_all(dir);
  std::string d = " " + std::to_string(commands.size()) +
                  " command lines over all seven subcommands rerun with -o; " +
                  std::to_string(mismatches) + " output or manifest mismatches";
  if (!failed.empty()) d += " (" + failed + " )";
  return {mismatches == 0, d};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"log-distance bound of Log-DenseNet V1", distance_bound_v1},
      {"LogLog connection count and MBD", loglog_sweep},
      {"LogLog mean in-degree bands", loglog_degree_bands},
      {"Table 2 parameter and FLOP counts", table2_costs},
      {"final two FC blocks carry >= 45% of FLOPs", final_blocks_share},
      {"MBD ordering of connection schemes at L=64", scheme_ordering},
      {"gradient check for every scheme at L <= 16", gradient_checks},
      {"micronet vs cost model parameter counts", parameter_equivalence},
      {"byte-identical CLI reruns", cli_determinism},
  };
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) {
    const int n = std::atoi(argv[a]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [criterion 1..%zu ...]\n", argv[0], criteria.size());
      return 2;
    }
    selected.push_back(n);
  }
  if (selected.empty()) {
    for (std::size_t n = 1; n <= criteria.size(); ++n) selected.push_back(static_cast<int>(n));
  }
  bool all = true;
  for (int n : selected) {
    const auto& [name, check] = criteria[n - 1];
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string(" threw: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %d %s: %s.%s\n", n, o.pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
