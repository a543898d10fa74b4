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

// Minimal tape-based reverse-mode differentiation over NCHW tensors.

#ifndef LOGDENSE_AUTOGRAD_HPP_
#define LOGDENSE_AUTOGRAD_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace logdense::ad {

struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_, double fill = 0.0)
      : n(n_), c(c_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t index(int in, int ic, int y, int x) const {
    return ((static_cast<std::size_t>(in) * c + ic) * h + y) * w + x;
  }
  double& at(int in, int ic, int y, int x) { return data[index(in, ic, y, x)]; }
  double at(int in, int ic, int y, int x) const { return data[index(in, ic, y, x)]; }
  bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
};

struct Var {
  int id = -1;
};

// Branch choices of piecewise ops (ReLU masks, max-pool winners) in tape
// order. Replaying a recorded pattern evaluates the smooth piece that contains
// the recording point.
struct PiecewisePattern {
  std::vector<std::vector<std::size_t>> choices;
  bool operator==(const PiecewisePattern&) const = default;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  Var leaf(Tensor value);
  Var push(Tensor value, Backward back);

  const Tensor& value(Var v) const { return entries_.at(v.id).value; }
  // Zero-filled until backward() reaches the variable.
  const Tensor& grad(Var v) const { return entries_.at(v.id).grad; }
  Tensor& grad_mut(int id);
  const Tensor& value_of(int id) const { return entries_.at(id).value; }

  // Seeds d(root)/d(root) = 1 and sweeps the tape in reverse.
  void backward(Var root);
  std::size_t size() const { return entries_.size(); }

  void record_pattern(PiecewisePattern* out) { record_ = out; }
  void replay_pattern(const PiecewisePattern* in) { replay_ = in; }
  // Returns the recorded choice when replaying, otherwise `natural`.
  std::vector<std::size_t> choose(std::vector<std::size_t> natural);

 private:
  struct Entry {
    Tensor value;
    Tensor grad;
    Backward back;
  };
  std::vector<Entry> entries_;
  PiecewisePattern* record_ = nullptr;
  const PiecewisePattern* replay_ = nullptr;
  std::size_t cursor_ = 0;
};

// 2D convolution, stride 1, zero padding k/2. w: (cout, cin, k, k); b: (1, cout, 1, 1).
Var conv2d(Tape& t, Var x, Var w, std::optional<Var> b = std::nullopt);
// Stride-2 transposed convolution doubling H and W (odd k, padding (k-1)/2,
// output padding 1). w: (cin, cout, k, k).
Var transposed_conv2d(Tape& t, Var x, Var w);
// Per-channel y = scale * x + shift. scale, shift: (1, c, 1, 1).
Var affine(Tape& t, Var x, Var scale, Var shift);
Var relu(Tape& t, Var x);
Var avg_pool2(Tape& t, Var x);
Var max_pool2(Tape& t, Var x);
Var global_avg_pool(Tape& t, Var x);
// x: (n, in, 1, 1); w: (out, in, 1, 1); b: (1, out, 1, 1).
Var linear(Tape& t, Var x, Var w, std::optional<Var> b = std::nullopt);
// Channel concatenation in argument order.
Var concat(Tape& t, const std::vector<Var>& xs);
// Mean cross-entropy over every (sample, pixel); labels indexed n*h*w.
Var softmax_cross_entropy(Tape& t, Var logits, const std::vector<int>& labels);
// Scalar sum_k weights[k] * xs[k].
Var weighted_sum(Tape& t, const std::vector<Var>& xs, const std::vector<double>& weights);

}  // namespace logdense::ad

#endif  // LOGDENSE_AUTOGRAD_HPP_
