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

#include "logdense/cli.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "logdense/cost_model.hpp"
#include "logdense/graph_analysis.hpp"
#include "logdense/micronet.hpp"
#include "logdense/topology.hpp"
#include "logdense/topology_io.hpp"

namespace logdense {

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string manifest_json(const RunManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["command"] = manifest.command;
  doc["arguments"] = manifest.arguments;
  doc["tool_version"] = manifest.tool_version;
  doc["seed"] = manifest.seed;
  nlohmann::ordered_json digests = nlohmann::ordered_json::object();
  for (const auto& [path, digest] : manifest.output_digests) digests[path] = digest;
  doc["output_digests"] = std::move(digests);
  return doc.dump(1) + "\n";
}

namespace {

struct TopologyFlags {
  std::string scheme;
  int layers = 0;
  std::vector<int> blocks;
  std::string budget = "log";
  int growth_rate = 12;
  int min_inputs = 1;
  bool no_step_b = false;
  int anchor = -1;
};

void add_topology_flags(CLI::App* cmd, TopologyFlags& f) {
  cmd->add_option("--scheme", f.scheme,
                  "dense, logdense-v1, logdense-v2, loglog, nearest, evenly-spaced, "
                  "nearest-half-and-log, fc-logdense");
  cmd->add_option("-L,--layers", f.layers, "number of feature layers");
  cmd->add_option("--blocks", f.blocks, "comma-separated block sizes")->delimiter(',');
  cmd->add_option("--budget", f.budget, "input budget for nearest / evenly-spaced: log or half")
      ->capture_default_str();
  cmd->add_option("-g,--growth-rate", f.growth_rate, "growth rate")->capture_default_str();
  cmd->add_option("--min-inputs", f.min_inputs, "loglog: minimum inputs per layer")
      ->capture_default_str();
  cmd->add_flag("--no-step-b", f.no_step_b, "loglog: skip the a_k -> interval edges");
  cmd->add_option("--anchor", f.anchor, "fc-logdense: anchor layer (defaults to first block end)");
}

Budget parse_budget(const std::string& s) {
  if (s == "log") return Budget::kLog;
  if (s == "half") return Budget::kHalf;
  throw ConfigError("unknown budget '" + s + "' (expected log or half)");
}

Topology make_topology(const TopologyFlags& f) {
  if (f.scheme.empty()) throw ConfigError("--scheme is required");
  const Scheme scheme = parse_scheme(f.scheme);
  if (scheme == Scheme::kFCLogDense) {
    const auto blocks = f.blocks.empty() ? fc_default_blocks() : f.blocks;
    Topology topo = fc_log_dense_topology(
        blocks, f.anchor >= 0 ? std::optional<NodeId>(f.anchor) : std::nullopt);
    if (f.layers != 0 && f.layers != topo.num_layers()) {
      throw ConfigError("--layers disagrees with the block sizes");
    }
    return topo;
  }
  if (f.layers < 1) throw ConfigError("--layers must be at least 1");
  switch (scheme) {
    case Scheme::kDense: return dense_topology(f.layers, f.blocks);
    case Scheme::kLogDenseV1: return log_dense_v1(f.layers, f.blocks);
    case Scheme::kLogDenseV2: return log_dense_v2(f.layers, f.blocks, f.growth_rate);
    case Scheme::kLogLog:
      return loglog_topology(f.layers, f.blocks, f.min_inputs, !f.no_step_b);
    case Scheme::kNearest: return nearest(f.layers, f.blocks, parse_budget(f.budget));
    case Scheme::kEvenlySpaced: return evenly_spaced(f.layers, f.blocks, parse_budget(f.budget));
    case Scheme::kNearestHalfAndLog: return nearest_half_and_log(f.layers, f.blocks);
    case Scheme::kFCLogDense: break;
  }
  throw ConfigError("unsupported scheme");
}

struct NetworkFlags {
  bool bottleneck = false;
  std::string compression = "auto";
  int hub_multiplier = 1;
  int resolution = 0;
  int height = 32;
  int width = 32;
  int classes = 10;
  int initial_channels = 0;
  std::string flops = "mac";
  bool no_deep_supervision = false;
};

void add_network_flags(CLI::App* cmd, NetworkFlags& f) {
  cmd->add_flag("--bottleneck", f.bottleneck, "1x1 bottleneck before each 3x3 conv");
  cmd->add_option("--compression", f.compression, "auto, none, v1 or v2")->capture_default_str();
  cmd->add_option("--hub-multiplier", f.hub_multiplier, "channel multiplier for LogLog hubs")
      ->capture_default_str();
  cmd->add_option("--resolution", f.resolution, "square input side (overrides height/width)");
  cmd->add_option("--height", f.height, "input height")->capture_default_str();
  cmd->add_option("--width", f.width, "input width")->capture_default_str();
  cmd->add_option("--classes", f.classes, "number of classes")->capture_default_str();
  cmd->add_option("--initial-channels", f.initial_channels, "x_0 width (default 2g)");
  cmd->add_option("--flops", f.flops, "mac or mac2 (two FLOPs per multiply-accumulate)")
      ->capture_default_str();
  cmd->add_flag("--no-deep-supervision", f.no_deep_supervision, "final head only");
}

FlopConvention parse_flops(const std::string& s) {
  if (s == "mac") return FlopConvention::kMAC;
  if (s == "mac2") return FlopConvention::kMACx2;
  throw ConfigError("unknown FLOP convention '" + s + "' (expected mac or mac2)");
}

NetworkConfig make_config(const Topology& topo, const TopologyFlags& t, const NetworkFlags& f) {
  NetworkConfig cfg;
  cfg.growth_rate = t.growth_rate;
  cfg.bottleneck = f.bottleneck;
  if (f.compression == "auto") {
    cfg.compression = topo.scheme() == Scheme::kLogDenseV2 ? Compression::kV2BlockCompression
                                                           : Compression::kV1IndependentTransition;
  } else {
    cfg.compression = parse_compression(f.compression);
  }
  cfg.hub_multiplier = f.hub_multiplier;
  cfg.input_height = f.resolution > 0 ? f.resolution : f.height;
  cfg.input_width = f.resolution > 0 ? f.resolution : f.width;
  cfg.num_classes = f.classes;
  cfg.initial_channels = f.initial_channels;
  cfg.flop_convention = parse_flops(f.flops);
  cfg.deep_supervision = !f.no_deep_supervision;
  return cfg;
}

Topology read_topology(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read topology file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return topology_from_json_string(ss.str());
}

std::string rational_text(const Rational& r) {
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string cmd_generate(const TopologyFlags& t, const std::string& format) {
  const Topology topo = make_topology(t);
  if (format == "json") return topology_to_json_string(topo);
  if (format == "dot") return topology_to_dot(topo);
  throw ConfigError("unknown format '" + format + "' (expected json or dot)");
}

std::string cmd_render(const std::string& in, const std::string& format, int cell) {
  const Topology topo = read_topology(in);
  if (format == "ascii") return render_ascii(topo, '#', '.');
  if (format == "pgm") return render_pgm(topo, PgmFormat::kPlain, cell);
  if (format == "pgm-raw") return render_pgm(topo, PgmFormat::kRaw, cell);
  throw ConfigError("unknown format '" + format + "' (expected ascii, pgm or pgm-raw)");
}

std::string cmd_analyze(const Topology& topo, const std::string& format, unsigned threads) {
  const AnalysisRow row = analyze_row(topo, threads);
  if (format == "csv") return analysis_csv_header() + analysis_csv_row(row);
  if (format != "json") throw ConfigError("unknown format '" + format + "' (expected json or csv)");
  const BDReport rep = mbd(topo, threads);
  const DegreeStats deg = degree_stats(topo);
  nlohmann::ordered_json doc;
  doc["scheme"] = row.scheme;
  doc["L"] = topo.num_layers();
  doc["n_block"] = topo.num_blocks();
  doc["edges"] = deg.total_edges;
  doc["mean_in_degree"] = rational_text(deg.mean_in_degree);
  doc["mean_in_degree_value"] = deg.mean_in_degree.value();
  doc["max_in_degree"] = deg.max_in_degree;
  doc["max_out_degree"] = deg.max_out_degree;
  doc["mbd"] = rep.mbd;
  doc["mbd_witness"] = {rep.witness_pair.first, rep.witness_pair.second};
  doc["mean_bd"] = rational_text(rep.mean_bd);
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [d, count] : rep.distance_histogram) hist[std::to_string(d)] = count;
  doc["bd_histogram"] = std::move(hist);
  doc["unreachable_pairs"] = rep.unreachable_pairs;
  if (row.bound) {
    doc["mbd_bound"] = *row.bound;
  } else {
    doc["mbd_bound"] = nullptr;
  }
  doc["within_bound"] = row.pass;
  if (topo.scheme() == Scheme::kLogLog) doc["hubs"] = hubs(topo);
  return doc.dump(1) + "\n";
}

std::string table_row(const std::string& name, const CostReport& r) {
  return "| " + name + " | " + fixed(static_cast<double>(r.total_flops) / 1e9, 1) + " | " +
         fixed(static_cast<double>(r.total_params) / 1e6, 2) + " |\n";
}

std::string blocks_report(const CostReport& r) {
  std::string out = "block,flops,fraction\n";
  const auto fr = block_cost_distribution(r);
  for (std::size_t b = 0; b < fr.size(); ++b) {
    out += std::to_string(b) + "," + std::to_string(r.per_block_flops[b]) + "," + fixed(fr[b], 6) +
           "\n";
  }
  return out;
}

struct CostFlags {
  std::string preset;
  std::string format = "table";
  bool blocks_report = false;
};

std::string cmd_cost(const TopologyFlags& t, const NetworkFlags& n, const CostFlags& c,
                     const CLI::App* cmd) {
  std::vector<std::pair<NetworkPlan, NetworkConfig>> plans;
  auto override_preset = [&](NetworkConfig cfg) {
    if (cmd->count("--resolution")) cfg.input_height = cfg.input_width = n.resolution;
    if (cmd->count("--height")) cfg.input_height = n.height;
    if (cmd->count("--width")) cfg.input_width = n.width;
    if (cmd->count("--flops")) cfg.flop_convention = parse_flops(n.flops);
    if (cmd->count("--classes")) cfg.num_classes = n.classes;
    if (cmd->count("--growth-rate")) cfg.growth_rate = t.growth_rate;
    if (cmd->count("--bottleneck")) cfg.bottleneck = n.bottleneck;
    return cfg;
  };
  if (c.preset == "fc-logdense-103" || c.preset == "table2") {
    const NetworkConfig cfg = override_preset(fc_logdense103_config());
    plans.emplace_back(fc_plan(cfg), cfg);
  }
  if (c.preset == "fc-densenet-103" || c.preset == "table2") {
    const NetworkConfig cfg = override_preset(fc_densenet103_config());
    plans.emplace_back(fc_densenet103_plan(cfg), cfg);
  }
  if (c.preset.empty()) {
    const Topology topo = make_topology(t);
    const NetworkConfig cfg = make_config(topo, t, n);
    plans.emplace_back(instantiate(topo, cfg), cfg);
  } else if (plans.empty()) {
    throw ConfigError("unknown preset '" + c.preset +
                      "' (expected fc-logdense-103, fc-densenet-103 or table2)");
  }

  std::string out;
  if (c.format == "table") out += "| Method | GFLOPS | # Params (M) |\n";
  if (c.format == "csv") out += cost_csv_header();
  const bool json_array = c.format == "json" && plans.size() > 1;
  if (json_array) out += "[\n";
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const auto& [plan, cfg] = plans[k];
    const CostReport r = flops(plan, cfg);
    if (c.format == "table") {
      out += table_row(plan.name, r);
    } else if (c.format == "csv") {
      out += cost_csv_row(plan.name, r);
    } else if (c.format == "json") {
      if (k > 0) out.insert(out.size() - 1, ",");
      out += cost_report_json(r, plan);
    } else {
      throw ConfigError("unknown format '" + c.format + "' (expected table, csv or json)");
    }
  }
  if (json_array) out += "]\n";
  // JSON already carries the per-block fractions
  if (c.blocks_report && c.format != "json") {
    for (const auto& [plan, cfg] : plans) {
      if (plans.size() > 1) out += "# " + plan.name + "\n";
      out += blocks_report(flops(plan, cfg));
    }
  }
  return out;
}

std::vector<int> split_blocks(int layers, int count) {
  if (count < 1 || count > layers) throw ConfigError("block count must be in [1, L]");
  std::vector<int> blocks(count, layers / count);
  for (int b = 0; b < layers % count; ++b) ++blocks[b];
  return blocks;
}

struct VerifyFlags {
  bool prop1 = false;
  bool prop2 = false;
  bool fig6a = false;
  std::vector<int> layers;
  std::vector<int> num_blocks{1};
  int first = 16;
  int last = 2000;
  int delta_last = 1700;
  unsigned threads = 0;
};

std::string cmd_verify(const VerifyFlags& v, bool* pass) {
  const int modes = v.prop1 + v.prop2 + v.fig6a;
  if (modes != 1) throw ConfigError("choose exactly one of --prop1, --prop2, --fig6a");
  std::string out;
  *pass = true;
  if (v.prop1) {
    const auto layers = v.layers.empty() ? std::vector<int>{16, 64, 256, 1024} : v.layers;
    out += "L,n_block,pairs,failures,min_slack,max_slack,pass\n";
    for (int L : layers) {
      for (int nb : v.num_blocks) {
        const auto rep = verify_prop1(log_dense_v1(L, split_blocks(L, nb)), v.threads);
        out += std::to_string(L) + "," + std::to_string(nb) + "," +
               std::to_string(rep.pairs_checked) + "," + std::to_string(rep.failures) + "," +
               std::to_string(rep.min_slack) + "," + std::to_string(rep.max_slack) + "," +
               (rep.pass ? "true" : "false") + "\n";
        *pass = *pass && rep.pass;
      }
    }
  } else if (v.prop2) {
    const auto layers = v.layers.empty() ? std::vector<int>{16, 64, 256, 1024, 4096} : v.layers;
    const auto rep = verify_prop2(layers, v.threads);
    out += "L,connections,count_bound,residual_per_layer,mbd,mbd_bound,mbd_without_b,"
           "mbd_without_b_bound,pass\n";
    for (const auto& r : rep.rows) {
      out += std::to_string(r.num_layers) + "," + std::to_string(r.connections) + "," +
             fixed(r.count_bound, 3) + "," + fixed(r.residual_per_layer, 6) + "," +
             std::to_string(r.mbd) + "," + std::to_string(r.mbd_bound) + "," +
             std::to_string(r.mbd_without_b) + "," + std::to_string(r.mbd_without_b_bound) + "," +
             (r.pass() ? "true" : "false") + "\n";
    }
    *pass = rep.pass;
  } else {
    const auto rep = loglog_degree_sweep(v.first, v.last, v.delta_last);
    out += "L,mean_in_plain,mean_in_augmented,delta,plain_in_band,delta_in_band\n";
    for (const auto& r : rep.rows) {
      out += std::to_string(r.num_layers) + "," + fixed(r.mean_plain.value(), 6) + "," +
             fixed(r.mean_augmented.value(), 6) + "," + fixed(r.delta, 6) + "," +
             (r.plain_in_band ? "true" : "false") + "," +
             (r.delta_in_band ? (*r.delta_in_band ? "true" : "false") : "") + "\n";
    }
    *pass = rep.pass;
  }
  return out;
}

struct MicroFlags {
  int size = 4;
  int batch = 2;
  int probes = 200;
  double epsilon = 1e-4;
  bool final_only = false;
  int steps = 200;
  double learning_rate = 0.1;
};

void add_micro_flags(CLI::App* cmd, MicroFlags& m) {
  cmd->add_option("--size", m.size, "square input side")->capture_default_str();
  cmd->add_option("--batch", m.batch, "samples in the synthetic batch")->capture_default_str();
  cmd->add_flag("--final-only", m.final_only, "optimize the final head only");
}

MicroModel make_micro(const TopologyFlags& t, NetworkFlags n, const MicroFlags& m,
                      std::uint64_t seed) {
  const Topology topo = make_topology(t);
  n.resolution = m.size;
  NetworkConfig cfg = make_config(topo, t, n);
  return build(topo, cfg, seed);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse skip-connection topologies: generation, analysis, costing, gradients",
               "logdense"};
  app.set_version_flag("--version", std::string("logdense ") + kToolVersion);
  app.require_subcommand(1);

  std::string out_path;
  std::uint64_t seed = 0;
  auto common = [&](CLI::App* cmd) {
    cmd->add_option("-o,--out", out_path, "write to FILE plus FILE.manifest.json");
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  };

  TopologyFlags gen_t;
  std::string gen_format = "json";
  auto* gen = app.add_subcommand("generate", "emit a topology as JSON or DOT");
  add_topology_flags(gen, gen_t);
  gen->add_option("--format", gen_format, "json or dot")->capture_default_str();
  common(gen);

  std::string render_in, render_format = "ascii";
  int render_cell = 1;
  auto* render = app.add_subcommand("render", "draw a topology's connection matrix");
  render->add_option("--in,input", render_in, "topology JSON file")->required();
  render->add_option("--format", render_format, "ascii, pgm (P2) or pgm-raw (P5)")
      ->capture_default_str();
  render->add_option("--cell", render_cell, "pixels per matrix cell")->capture_default_str();
  common(render);

  TopologyFlags an_t;
  std::string an_in, an_format = "json";
  unsigned an_threads = 0;
  auto* analyze = app.add_subcommand("analyze", "backpropagation distances and degrees");
  analyze->add_option("--in,input", an_in, "topology JSON file (or give --scheme)");
  add_topology_flags(analyze, an_t);
  analyze->add_option("--format", an_format, "json or csv")->capture_default_str();
  analyze->add_option("--threads", an_threads, "worker threads (0 = all cores)");
  common(analyze);

  TopologyFlags cost_t;
  NetworkFlags cost_n;
  CostFlags cost_c;
  auto* cost = app.add_subcommand("cost", "FLOP and parameter accounting");
  add_topology_flags(cost, cost_t);
  add_network_flags(cost, cost_n);
  cost->add_option("--preset", cost_c.preset, "fc-logdense-103, fc-densenet-103 or table2");
  cost->add_option("--format", cost_c.format, "table, csv or json")->capture_default_str();
  cost->add_flag("--blocks-report", cost_c.blocks_report, "per-block FLOP fractions");
  common(cost);

  VerifyFlags ver;
  auto* verify = app.add_subcommand("verify", "check distance and degree bounds");
  verify->add_flag("--prop1", ver.prop1, "log-distance bound of Log-DenseNet V1");
  verify->add_flag("--prop2", ver.prop2, "connection count and MBD of LogLog");
  verify->add_flag("--fig6a", ver.fig6a, "mean in-degree bands of LogLog");
  verify->add_option("-L,--layers", ver.layers, "comma-separated L values")->delimiter(',');
  verify->add_option("--num-blocks", ver.num_blocks, "comma-separated block counts (prop1)")
      ->delimiter(',');
  verify->add_option("--from", ver.first, "fig6a: first L")->capture_default_str();
  verify->add_option("--to", ver.last, "fig6a: last L")->capture_default_str();
  verify->add_option("--delta-to", ver.delta_last, "fig6a: last L for the augmentation band")
      ->capture_default_str();
  verify->add_option("--threads", ver.threads, "worker threads (0 = all cores)");
  common(verify);

  TopologyFlags gc_t;
  gc_t.growth_rate = 2;
  NetworkFlags gc_n;
  gc_n.classes = 3;
  MicroFlags gc_m;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_topology_flags(gradcheck, gc_t);
  add_network_flags(gradcheck, gc_n);
  add_micro_flags(gradcheck, gc_m);
  gradcheck->add_option("--probes", gc_m.probes, "parameters probed (0 = all)")
      ->capture_default_str();
  gradcheck->add_option("--epsilon", gc_m.epsilon, "central-difference step")
      ->capture_default_str();
  common(gradcheck);

  TopologyFlags tr_t;
  tr_t.growth_rate = 2;
  NetworkFlags tr_n;
  tr_n.classes = 3;
  MicroFlags tr_m;
  tr_m.batch = 8;
  auto* train = app.add_subcommand("train", "gradient descent on a synthetic memorization task");
  add_topology_flags(train, tr_t);
  add_network_flags(train, tr_n);
  add_micro_flags(train, tr_m);
  train->add_option("--steps", tr_m.steps, "descent steps")->capture_default_str();
  train->add_option("--lr", tr_m.learning_rate, "learning rate")->capture_default_str();
  common(train);

  std::vector<const char*> argv{"logdense"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  int status = kExitOk;
  std::string text;
  try {
    if (chosen == gen) {
      text = cmd_generate(gen_t, gen_format);
    } else if (chosen == render) {
      text = cmd_render(render_in, render_format, render_cell);
    } else if (chosen == analyze) {
      if (an_in.empty() == an_t.scheme.empty()) {
        throw ConfigError("give either a topology file or --scheme");
      }
      text = cmd_analyze(an_in.empty() ? make_topology(an_t) : read_topology(an_in), an_format,
                         an_threads);
    } else if (chosen == cost) {
      text = cmd_cost(cost_t, cost_n, cost_c, cost);
    } else if (chosen == verify) {
      bool pass = true;
      text = cmd_verify(ver, &pass);
      if (!pass) status = kExitVerificationFailed;
    } else if (chosen == gradcheck) {
      const MicroModel model = make_micro(gc_t, gc_n, gc_m, seed);
      const Batch batch = synthetic_batch(model, gc_m.batch, seed + 1);
      const auto rep = grad_check(model, batch, LossSpec{gc_m.final_only}, gc_m.epsilon,
                                  gc_m.probes, seed + 2);
      text = grad_check_json(rep);
      if (!rep.pass) status = kExitVerificationFailed;
    } else if (chosen == train) {
      MicroModel model = make_micro(tr_t, tr_n, tr_m, seed);
      const Batch batch = synthetic_batch(model, tr_m.batch, seed + 1);
      const auto result =
          train_toy(model, batch, tr_m.steps, tr_m.learning_rate, LossSpec{tr_m.final_only});
      text = train_csv(result);
      if (result.diverged) {
        err << "training diverged at step " << result.diverged_at << "\n";
        status = kExitVerificationFailed;
      }
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (out_path.empty()) {
    out << text;
    return status;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file || !(file << text)) {
    err << "error: cannot write '" << out_path << "'\n";
    return kExitUsage;
  }
  file.close();
  RunManifest manifest;
  manifest.command = chosen->get_name();
  manifest.arguments = args;
  manifest.seed = seed;
  manifest.output_digests[out_path] = sha256_hex(text);
  std::ofstream side(out_path + ".manifest.json", std::ios::binary);
  side << manifest_json(manifest);
  if (!side) {
    err << "error: cannot write manifest for '" << out_path << "'\n";
    return kExitUsage;
  }
  return status;
}

}  // namespace logdense
