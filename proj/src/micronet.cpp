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

#include "logdense/micronet.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace logdense {

using ad::Tensor;
using ad::Var;

std::int64_t MicroModel::num_parameters() const {
  std::int64_t total = 0;
  for (const auto& p : params) total += static_cast<std::int64_t>(p.value.size());
  return total;
}

namespace {

void fill_uniform(Tensor& t, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : t.data) v = dist(rng);
}

std::string param_name(int step, int op, const char* what) {
  return "step" + std::to_string(step) + ".op" + std::to_string(op) + "." + what;
}

}  // namespace

MicroModel build(const Topology& topo, const NetworkConfig& cfg, std::uint64_t seed) {
  if (topo.num_layers() > kDeskMaxLayers) {
    throw ConfigError("micronet is limited to " + std::to_string(kDeskMaxLayers) + " layers");
  }
  if (cfg.growth_rate > kDeskMaxGrowth) {
    throw ConfigError("micronet is limited to growth rate " + std::to_string(kDeskMaxGrowth));
  }
  if (cfg.input_height > kDeskMaxSide || cfg.input_width > kDeskMaxSide) {
    throw ConfigError("micronet inputs are limited to " + std::to_string(kDeskMaxSide) + "x" +
                      std::to_string(kDeskMaxSide));
  }
  MicroModel model{topo, instantiate(topo, cfg), {}, {}, seed};
  std::mt19937_64 rng(seed);
  const auto& steps = model.plan.steps;
  model.op_params.resize(steps.size());
  for (std::size_t s = 0; s < steps.size(); ++s) {
    auto& per_op = model.op_params[s];
    per_op.resize(steps[s].ops.size());
    for (std::size_t o = 0; o < steps[s].ops.size(); ++o) {
      const Op& op = steps[s].ops[o];
      auto add = [&](const char* what, Tensor value) {
        per_op[o].push_back(static_cast<int>(model.params.size()));
        model.params.push_back({param_name(static_cast<int>(s), static_cast<int>(o), what),
                                std::move(value)});
        return &model.params.back().value;
      };
      switch (op.kind) {
        case OpKind::kConv:
        case OpKind::kTransposedConv:
        case OpKind::kLinear: {
          const int k = op.kind == OpKind::kLinear ? 1 : op.kernel;
          const double bound = std::sqrt(6.0 / (static_cast<double>(op.in_channels) * k * k));
          Tensor w = op.kind == OpKind::kTransposedConv ? Tensor(op.in_channels, op.out_channels, k, k)
                                                        : Tensor(op.out_channels, op.in_channels, k, k);
          fill_uniform(w, rng, -bound, bound);
          add("weight", std::move(w));
          if (op.bias) {
            Tensor b(1, op.out_channels, 1, 1);
            fill_uniform(b, rng, -bound, bound);
            add("bias", std::move(b));
          }
          break;
        }
        case OpKind::kNorm: {
          Tensor scale(1, op.in_channels, 1, 1);
          Tensor shift(1, op.in_channels, 1, 1);
          fill_uniform(scale, rng, 0.9, 1.1);
          fill_uniform(shift, rng, -0.1, 0.1);
          add("scale", std::move(scale));
          add("shift", std::move(shift));
          break;
        }
        default:
          break;
      }
    }
  }
  return model;
}

Batch synthetic_batch(const MicroModel& model, int samples, std::uint64_t seed) {
  if (samples < 1) throw ConfigError("batch needs at least one sample");
  const NetworkConfig& cfg = model.plan.config;
  std::mt19937_64 rng(seed);
  Batch batch;
  batch.images = Tensor(samples, cfg.image_channels, cfg.input_height, cfg.input_width);
  fill_uniform(batch.images, rng, -1.0, 1.0);
  const std::size_t count = model.plan.head_kind == HeadKind::kPixelwise
                                ? static_cast<std::size_t>(samples) * cfg.input_height * cfg.input_width
                                : static_cast<std::size_t>(samples);
  std::uniform_int_distribution<int> label(0, cfg.num_classes - 1);
  batch.labels.resize(count);
  for (int& l : batch.labels) l = label(rng);
  return batch;
}

std::vector<double> loss_weights(int aux_heads, const LossSpec& spec) {
  if (aux_heads < 0) throw ConfigError("negative head count");
  std::vector<double> w(aux_heads + 1, 0.0);
  if (aux_heads == 0 || spec.final_only) {
    w.back() = 1.0;
    return w;
  }
  for (int k = 0; k < aux_heads; ++k) w[k] = 0.5 / aux_heads;
  w.back() = 0.5;
  return w;
}

ForwardPass forward(const MicroModel& model, const Tensor& images, const PatternControl& pattern) {
  const NetworkPlan& plan = model.plan;
  const NetworkConfig& cfg = plan.config;
  if (images.n < 1 || images.c != cfg.image_channels || images.h != cfg.input_height ||
      images.w != cfg.input_width) {
    throw ConfigError("input batch does not match the configured image shape");
  }
  ForwardPass pass;
  ad::Tape& tape = pass.tape;
  tape.record_pattern(pattern.record);
  tape.replay_pattern(pattern.replay);
  for (const auto& p : model.params) pass.params.push_back(tape.leaf(p.value));
  pass.tensors.assign(plan.tensors.size(), Var{});
  pass.tensors[0] = tape.leaf(images);

  for (std::size_t s = 0; s < plan.steps.size(); ++s) {
    const Step& step = plan.steps[s];
    std::vector<Var> in;
    for (int t : step.inputs) in.push_back(pass.tensors.at(t));
    Var x = in.size() == 1 ? in.front() : ad::concat(tape, in);
    for (std::size_t o = 0; o < step.ops.size(); ++o) {
      const Op& op = step.ops[o];
      const auto& ids = model.op_params[s][o];
      auto param = [&](int k) { return pass.params.at(ids.at(k)); };
      switch (op.kind) {
        case OpKind::kConv:
          x = ad::conv2d(tape, x, param(0), op.bias ? std::optional<Var>(param(1)) : std::nullopt);
          break;
        case OpKind::kTransposedConv:
          x = ad::transposed_conv2d(tape, x, param(0));
          break;
        case OpKind::kLinear:
          x = ad::linear(tape, x, param(0), op.bias ? std::optional<Var>(param(1)) : std::nullopt);
          break;
        case OpKind::kNorm:
          x = ad::affine(tape, x, param(0), param(1));
          break;
        case OpKind::kRelu:
          x = ad::relu(tape, x);
          break;
        case OpKind::kAvgPool:
          x = ad::avg_pool2(tape, x);
          break;
        case OpKind::kMaxPool:
          x = ad::max_pool2(tape, x);
          break;
        case OpKind::kGlobalAvgPool:
          x = ad::global_avg_pool(tape, x);
          break;
      }
    }
    const Tensor& v = tape.value(x);
    const TensorInfo& info = plan.tensors[step.output];
    const bool spatial = !(step.kind == StepKind::kHead && plan.head_kind == HeadKind::kClassifier);
    if (v.c != info.channels ||
        (spatial && (v.h != cfg.input_height >> info.level || v.w != cfg.input_width >> info.level))) {
      throw ConfigError("step " + std::to_string(s) + " produced a tensor the plan did not expect");
    }
    pass.tensors[step.output] = x;
    if (step.kind == StepKind::kHead) pass.heads.push_back(x);
  }
  return pass;
}

std::vector<int> head_labels(const MicroModel& model, const Batch& batch, int head) {
  const NetworkPlan& plan = model.plan;
  if (plan.head_kind == HeadKind::kClassifier) return batch.labels;
  const Step& step = plan.steps.at(plan.head_steps.at(head));
  const int level = step.ops.back().level;
  const int H = plan.config.input_height, W = plan.config.input_width;
  const int h = H >> level, w = W >> level;
  const int n = batch.images.n;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n) * h * w);
  for (int i = 0; i < n; ++i)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        out.push_back(batch.labels.at((static_cast<std::size_t>(i) * H + (y << level)) * W +
                                      (x << level)));
      }
  return out;
}

Var loss(ForwardPass& pass, const MicroModel& model, const Batch& batch, const LossSpec& spec) {
  const auto weights = loss_weights(model.num_aux_heads(), spec);
  pass.head_losses.clear();
  for (std::size_t k = 0; k < pass.heads.size(); ++k) {
    pass.head_losses.push_back(ad::softmax_cross_entropy(pass.tape, pass.heads[k],
                                                         head_labels(model, batch, static_cast<int>(k))));
  }
  pass.loss = ad::weighted_sum(pass.tape, pass.head_losses, weights);
  return *pass.loss;
}

std::vector<Tensor> backward(ForwardPass& pass) {
  if (!pass.loss) throw ConfigError("backward needs a loss");
  pass.tape.backward(*pass.loss);
  std::vector<Tensor> grads;
  grads.reserve(pass.params.size());
  for (Var p : pass.params) grads.push_back(pass.tape.grad(p));
  return grads;
}

double loss_value(const MicroModel& model, const Batch& batch, const LossSpec& spec,
                  const PatternControl& pattern) {
  ForwardPass pass = forward(model, batch.images, pattern);
  return pass.tape.value(loss(pass, model, batch, spec)).data[0];
}

std::vector<Tensor> gradients(const MicroModel& model, const Batch& batch, const LossSpec& spec) {
  ForwardPass pass = forward(model, batch.images);
  loss(pass, model, batch, spec);
  return backward(pass);
}

GradCheckReport grad_check(const MicroModel& model, const Batch& batch, const LossSpec& spec,
                           double epsilon, int samples, std::uint64_t seed) {
  if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
  GradCheckReport rep;
  rep.scheme = scheme_name(model.topo.scheme());
  rep.num_layers = model.topo.num_layers();
  rep.growth_rate = model.plan.config.growth_rate;

  std::vector<std::pair<int, std::size_t>> coords;
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    for (std::size_t e = 0; e < model.params[p].value.size(); ++e) {
      coords.emplace_back(static_cast<int>(p), e);
    }
  }
  if (samples > 0 && static_cast<std::size_t>(samples) < coords.size()) {
    std::mt19937_64 rng(seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(samples);
    std::sort(coords.begin(), coords.end());
  }

  const auto analytic = gradients(model, batch, spec);
  ad::PiecewisePattern base;
  loss_value(model, batch, spec, {&base, nullptr});
  MicroModel probe = model;
  auto probe_loss = [&](bool* crossed) {
    ad::PiecewisePattern seen;
    const double l = loss_value(probe, batch, spec, {&seen, nullptr});
    if (seen == base) return l;
    *crossed = true;
    return loss_value(probe, batch, spec, {nullptr, &base});
  };
  for (const auto& [p, e] : coords) {
    double& v = probe.params[p].value.data[e];
    const double saved = v;
    bool crossed = false;
    v = saved + epsilon;
    const double up = probe_loss(&crossed);
    v = saved - epsilon;
    const double down = probe_loss(&crossed);
    v = saved;
    rep.kink_crossings += crossed;
    const double numeric = (up - down) / (2 * epsilon);
    const double a = analytic[p].data[e];
    const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
    const double rel = std::abs(a - numeric) / denom;
    if (rep.worst_param.empty() || rel > rep.max_rel_err) {
      rep.max_rel_err = rel;
      rep.worst_param = model.params[p].name + "[" + std::to_string(e) + "]";
    }
    ++rep.checked;
  }
  rep.pass = rep.max_rel_err < kGradCheckTolerance;
  return rep;
}

std::string grad_check_json(const GradCheckReport& report) {
  nlohmann::ordered_json doc;
  doc["scheme"] = report.scheme;
  doc["L"] = report.num_layers;
  doc["g"] = report.growth_rate;
  doc["checked"] = report.checked;
  doc["kink_crossings"] = report.kink_crossings;
  doc["max_rel_err"] = report.max_rel_err;
  doc["worst_param"] = report.worst_param;
  doc["pass"] = report.pass;
  return doc.dump(1) + "\n";
}

std::optional<int> gradient_reach(const MicroModel& model, NodeId j) {
  const NetworkPlan& plan = model.plan;
  if (j < 0 || j >= static_cast<int>(plan.node_tensor.size()) || plan.node_tensor[j] < 0) {
    throw ConfigError("node has no output tensor");
  }
  std::vector<int> producer(plan.tensors.size(), -1);
  for (std::size_t s = 0; s < plan.steps.size(); ++s) producer[plan.steps[s].output] = static_cast<int>(s);

  const NodeId final_node = model.topo.num_nodes() - 1;
  const int unset = std::numeric_limits<int>::max();
  std::vector<int> dist(plan.tensors.size(), unset);
  std::deque<int> queue{plan.node_tensor[final_node]};
  dist[queue.front()] = 0;
  while (!queue.empty()) {
    const int t = queue.front();
    queue.pop_front();
    const int s = producer[t];
    if (s < 0) continue;  // the image
    const Step& step = plan.steps[s];
    const int cost = step.kind == StepKind::kLayer || step.kind == StepKind::kCompression ||
                             step.kind == StepKind::kInitial
                         ? 1
                         : 0;
    for (int u : step.inputs) {
      if (dist[t] + cost < dist[u]) {
        dist[u] = dist[t] + cost;
        if (cost == 0) {
          queue.push_front(u);
        } else {
          queue.push_back(u);
        }
      }
    }
  }
  const int d = dist[plan.node_tensor[j]];
  if (d == unset) return std::nullopt;
  return d;
}

Tensor activation_gradient(const MicroModel& model, const Batch& batch, NodeId j) {
  ForwardPass pass = forward(model, batch.images);
  loss(pass, model, batch, LossSpec{true});
  pass.tape.backward(*pass.loss);
  return pass.tape.grad(pass.tensors.at(model.plan.node_tensor.at(j)));
}

TrainResult train_toy(MicroModel& model, const Batch& data, int steps, double learning_rate,
                      const LossSpec& spec) {
  if (steps < 0) throw ConfigError("step count must be non-negative");
  TrainResult result;
  for (int step = 0; step < steps; ++step) {
    ForwardPass pass = forward(model, data.images);
    const Var total = loss(pass, model, data, spec);
    TrainStep row;
    row.step = step;
    for (Var h : pass.head_losses) row.head_losses.push_back(pass.tape.value(h).data[0]);
    row.total = pass.tape.value(total).data[0];
    result.trajectory.push_back(row);
    if (!std::isfinite(row.total)) {
      result.diverged = true;
      result.diverged_at = step;
      break;
    }
    const auto grads = backward(pass);
    for (std::size_t p = 0; p < model.params.size(); ++p) {
      auto& v = model.params[p].value.data;
      for (std::size_t e = 0; e < v.size(); ++e) v[e] -= learning_rate * grads[p].data[e];
    }
  }
  return result;
}

std::string train_csv(const TrainResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << "step";
  const std::size_t heads = result.trajectory.empty() ? 0 : result.trajectory.front().head_losses.size();
  for (std::size_t k = 0; k + 1 < heads; ++k) os << ",aux" << k;
  if (heads > 0) os << ",final";
  os << ",total\n";
  for (const auto& row : result.trajectory) {
    os << row.step;
    for (double l : row.head_losses) os << "," << l;
    os << "," << row.total << "\n";
  }
  return os.str();
}

}  // namespace logdense
