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

#include "logdense/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace logdense::ad {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("shape mismatch: ") + what);
}

}  // namespace

Var Tape::leaf(Tensor value) { return push(std::move(value), nullptr); }

Var Tape::push(Tensor value, Backward back) {
  Entry e;
  e.grad = Tensor(value.n, value.c, value.h, value.w);
  e.value = std::move(value);
  e.back = std::move(back);
  entries_.push_back(std::move(e));
  return {static_cast<int>(entries_.size()) - 1};
}

std::vector<std::size_t> Tape::choose(std::vector<std::size_t> natural) {
  if (replay_) {
    require(cursor_ < replay_->choices.size() && replay_->choices[cursor_].size() == natural.size(),
            "replayed pattern does not fit this tape");
    natural = replay_->choices[cursor_++];
  }
  if (record_) record_->choices.push_back(natural);
  return natural;
}

Tensor& Tape::grad_mut(int id) { return entries_.at(id).grad; }

void Tape::backward(Var root) {
  require(value(root).size() == 1, "backward needs a scalar root");
  for (auto& e : entries_) std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
  entries_[root.id].grad.data[0] = 1.0;
  for (int i = root.id; i >= 0; --i) {
    if (entries_[i].back) entries_[i].back(*this, i);
  }
}

Var conv2d(Tape& t, Var x, Var w, std::optional<Var> b) {
  const Tensor& X = t.value(x);
  const Tensor& W = t.value(w);
  require(W.c == X.c, "conv input channels");
  require(W.h == W.w && W.h % 2 == 1, "conv kernel must be odd and square");
  if (b) require(t.value(*b).c == W.n, "conv bias");
  const int k = W.h, p = k / 2;
  Tensor Y(X.n, W.n, X.h, X.w);
  for (int n = 0; n < X.n; ++n)
    for (int co = 0; co < W.n; ++co)
      for (int y = 0; y < X.h; ++y)
        for (int xx = 0; xx < X.w; ++xx) {
          double s = b ? t.value(*b).data[co] : 0.0;
          for (int ci = 0; ci < X.c; ++ci)
            for (int ky = 0; ky < k; ++ky) {
              const int iy = y + ky - p;
              if (iy < 0 || iy >= X.h) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int ix = xx + kx - p;
                if (ix < 0 || ix >= X.w) continue;
                s += X.at(n, ci, iy, ix) * W.at(co, ci, ky, kx);
              }
            }
          Y.at(n, co, y, xx) = s;
        }
  return t.push(std::move(Y), [x, w, b, k, p](Tape& tp, int self) {
    const Tensor& X = tp.value_of(x.id);
    const Tensor& W = tp.value_of(w.id);
    const Tensor G = tp.grad_mut(self);
    Tensor& gx = tp.grad_mut(x.id);
    Tensor& gw = tp.grad_mut(w.id);
    for (int n = 0; n < G.n; ++n)
      for (int co = 0; co < G.c; ++co)
        for (int y = 0; y < G.h; ++y)
          for (int xx = 0; xx < G.w; ++xx) {
            const double g = G.at(n, co, y, xx);
            if (g == 0.0) continue;
            if (b) tp.grad_mut(b->id).data[co] += g;
            for (int ci = 0; ci < X.c; ++ci)
              for (int ky = 0; ky < k; ++ky) {
                const int iy = y + ky - p;
                if (iy < 0 || iy >= X.h) continue;
                for (int kx = 0; kx < k; ++kx) {
                  const int ix = xx + kx - p;
                  if (ix < 0 || ix >= X.w) continue;
                  gx.at(n, ci, iy, ix) += g * W.at(co, ci, ky, kx);
                  gw.at(co, ci, ky, kx) += g * X.at(n, ci, iy, ix);
                }
              }
          }
  });
}

Var transposed_conv2d(Tape& t, Var x, Var w) {
  const Tensor& X = t.value(x);
  const Tensor& W = t.value(w);
  require(W.n == X.c, "transposed conv input channels");
  require(W.h == W.w && W.h % 2 == 1, "transposed conv kernel must be odd and square");
  const int k = W.h, p = (k - 1) / 2;
  Tensor Y(X.n, W.c, 2 * X.h, 2 * X.w);
  for (int n = 0; n < X.n; ++n)
    for (int ci = 0; ci < X.c; ++ci)
      for (int y = 0; y < X.h; ++y)
        for (int xx = 0; xx < X.w; ++xx) {
          const double v = X.at(n, ci, y, xx);
          for (int co = 0; co < W.c; ++co)
            for (int ky = 0; ky < k; ++ky) {
              const int oy = 2 * y - p + ky;
              if (oy < 0 || oy >= Y.h) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int ox = 2 * xx - p + kx;
                if (ox < 0 || ox >= Y.w) continue;
                Y.at(n, co, oy, ox) += v * W.at(ci, co, ky, kx);
              }
            }
        }
  return t.push(std::move(Y), [x, w, k, p](Tape& tp, int self) {
    const Tensor& X = tp.value_of(x.id);
    const Tensor& W = tp.value_of(w.id);
    const Tensor G = tp.grad_mut(self);
    Tensor& gx = tp.grad_mut(x.id);
    Tensor& gw = tp.grad_mut(w.id);
    for (int n = 0; n < X.n; ++n)
      for (int ci = 0; ci < X.c; ++ci)
        for (int y = 0; y < X.h; ++y)
          for (int xx = 0; xx < X.w; ++xx) {
            const double v = X.at(n, ci, y, xx);
            double acc = 0.0;
            for (int co = 0; co < W.c; ++co)
              for (int ky = 0; ky < k; ++ky) {
                const int oy = 2 * y - p + ky;
                if (oy < 0 || oy >= G.h) continue;
                for (int kx = 0; kx < k; ++kx) {
                  const int ox = 2 * xx - p + kx;
                  if (ox < 0 || ox >= G.w) continue;
                  const double g = G.at(n, co, oy, ox);
                  acc += g * W.at(ci, co, ky, kx);
                  gw.at(ci, co, ky, kx) += g * v;
                }
              }
            gx.at(n, ci, y, xx) += acc;
          }
  });
}

Var affine(Tape& t, Var x, Var scale, Var shift) {
  const Tensor& X = t.value(x);
  require(t.value(scale).c == X.c && t.value(shift).c == X.c, "affine channels");
  Tensor Y = X;
  const auto& S = t.value(scale).data;
  const auto& B = t.value(shift).data;
  for (int n = 0; n < X.n; ++n)
    for (int c = 0; c < X.c; ++c)
      for (int y = 0; y < X.h; ++y)
        for (int xx = 0; xx < X.w; ++xx) Y.at(n, c, y, xx) = S[c] * X.at(n, c, y, xx) + B[c];
  return t.push(std::move(Y), [x, scale, shift](Tape& tp, int self) {
    const Tensor& X = tp.value_of(x.id);
    const Tensor G = tp.grad_mut(self);
    const auto S = tp.value_of(scale.id).data;
    Tensor& gx = tp.grad_mut(x.id);
    Tensor& gs = tp.grad_mut(scale.id);
    Tensor& gb = tp.grad_mut(shift.id);
    for (int n = 0; n < X.n; ++n)
      for (int c = 0; c < X.c; ++c)
        for (int y = 0; y < X.h; ++y)
          for (int xx = 0; xx < X.w; ++xx) {
            const double g = G.at(n, c, y, xx);
            gx.at(n, c, y, xx) += g * S[c];
            gs.data[c] += g * X.at(n, c, y, xx);
            gb.data[c] += g;
          }
  });
}

Var relu(Tape& t, Var x) {
  Tensor Y = t.value(x);
  std::vector<std::size_t> active(Y.size());
  for (std::size_t i = 0; i < Y.size(); ++i) active[i] = Y.data[i] > 0.0;
  active = t.choose(std::move(active));
  for (std::size_t i = 0; i < Y.size(); ++i) {
    if (!active[i]) Y.data[i] = 0.0;
  }
  return t.push(std::move(Y), [x, active](Tape& tp, int self) {
    const Tensor G = tp.grad_mut(self);
    Tensor& gx = tp.grad_mut(x.id);
    for (std::size_t i = 0; i < G.size(); ++i) {
      if (active[i]) gx.data[i] += G.data[i];
    }
  });
}

Var avg_pool2(Tape& t, Var x) {
  const Tensor& X = t.value(x);
  require(X.h % 2 == 0 && X.w % 2 == 0, "pooling needs even spatial size");
  Tensor Y(X.n, X.c, X.h / 2, X.w / 2);
  for (int n = 0; n < X.n; ++n)
    for (int c = 0; c < X.c; ++c)
      for (int y = 0; y < Y.h; ++y)
        for (int xx = 0; xx < Y.w; ++xx) {
          Y.at(n, c, y, xx) = 0.25 * (X.at(n, c, 2 * y, 2 * xx) + X.at(n, c, 2 * y, 2 * xx + 1) +
                                      X.at(n, c, 2 * y + 1, 2 * xx) +
                                      X.at(n, c, 2 * y + 1, 2 * xx + 1));
        }
  return t.push(std::move(Y), [x](Tape& tp, int self) {
    const Tensor G = tp.grad_mut(self);
    Tensor& gx = tp.grad_mut(x.id);
    for (int n = 0; n < G.n; ++n)
      for (int c = 0; c < G.c; ++c)
        for (int y = 0; y < G.h; ++y)
          for (int xx = 0; xx < G.w; ++xx) {
            const double g = 0.25 * G.at(n, c, y, xx);
            gx.at(n, c, 2 * y, 2 * xx) += g;
            gx.at(n, c, 2 * y, 2 * xx + 1) += g;
            gx.at(n, c, 2 * y + 1, 2 * xx) += g;
            gx.at(n, c, 2 * y + 1, 2 * xx + 1) += g;
          }
  });
}

Var max_pool2(Tape& t, Var x) {
  const Tensor& X = t.value(x);
  require(X.h % 2 == 0 && X.w % 2 == 0, "pooling needs even spatial size");
  Tensor Y(X.n, X.c, X.h / 2, X.w / 2);
  std::vector<std::size_t> argmax(Y.size());
  for (int n = 0; n < X.n; ++n)
    for (int c = 0; c < X.c; ++c)
      for (int y = 0; y < Y.h; ++y)
        for (int xx = 0; xx < Y.w; ++xx) {
          std::size_t best = X.index(n, c, 2 * y, 2 * xx);
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const std::size_t i = X.index(n, c, 2 * y + dy, 2 * xx + dx);
              if (X.data[i] > X.data[best]) best = i;
            }
          argmax[Y.index(n, c, y, xx)] = best;
        }
  argmax = t.choose(std::move(argmax));
  for (std::size_t i = 0; i < Y.size(); ++i) Y.data[i] = X.data[argmax[i]];
  return t.push(std::move(Y), [x, argmax](Tape& tp, int self) {
    const Tensor G = tp.grad_mut(self);
    Tensor& gx = tp.grad_mut(x.id);
    for (std::size_t i = 0; i < G.size(); ++i) gx.data[argmax[i]] += G.data[i];
  });
}

Var global_avg_pool(Tape& t, Var x) {
  const Tensor& X = t.value(x);
  Tensor Y(X.n, X.c, 1, 1);
  const double inv = 1.0 / (X.h * X.w);
  for (int n = 0; n < X.n; ++n)
    for (int c = 0; c < X.c; ++c) {
      double s = 0.0;
      for (int y = 0; y < X.h; ++y)
        for (int xx = 0; xx < X.w; ++xx) s += X.at(n, c, y, xx);
      Y.at(n, c, 0, 0) = s * inv;
    }
  return t.push(std::move(Y), [x, inv](Tape& tp, int self) {
    const Tensor G = tp.grad_mut(self);
    Tensor& gx = tp.grad_mut(x.id);
    for (int n = 0; n < gx.n; ++n)
      for (int c = 0; c < gx.c; ++c)
        for (int y = 0; y < gx.h; ++y)
          for (int xx = 0; xx < gx.w; ++xx) gx.at(n, c, y, xx) += G.at(n, c, 0, 0) * inv;
  });
}

Var linear(Tape& t, Var x, Var w, std::optional<Var> b) {
  const Tensor& X = t.value(x);
  const Tensor& W = t.value(w);
  require(X.h == 1 && X.w == 1 && W.c == X.c, "linear input");
  if (b) require(t.value(*b).c == W.n, "linear bias");
  Tensor Y(X.n, W.n, 1, 1);
  for (int n = 0; n < X.n; ++n)
    for (int o = 0; o < W.n; ++o) {
      double s = b ? t.value(*b).data[o] : 0.0;
      for (int i = 0; i < X.c; ++i) s += W.at(o, i, 0, 0) * X.at(n, i, 0, 0);
      Y.at(n, o, 0, 0) = s;
    }
  return t.push(std::move(Y), [x, w, b](Tape& tp, int self) {
    const Tensor& X = tp.value_of(x.id);
    const Tensor& W = tp.value_of(w.id);
    const Tensor G = tp.grad_mut(self);
    Tensor& gx = tp.grad_mut(x.id);
    Tensor& gw = tp.grad_mut(w.id);
    for (int n = 0; n < X.n; ++n)
      for (int o = 0; o < W.n; ++o) {
        const double g = G.at(n, o, 0, 0);
        if (b) tp.grad_mut(b->id).data[o] += g;
        for (int i = 0; i < X.c; ++i) {
          gx.at(n, i, 0, 0) += g * W.at(o, i, 0, 0);
          gw.at(o, i, 0, 0) += g * X.at(n, i, 0, 0);
        }
      }
  });
}

Var concat(Tape& t, const std::vector<Var>& xs) {
  require(!xs.empty(), "concat of nothing");
  const Tensor& first = t.value(xs.front());
  int channels = 0;
  for (Var v : xs) {
    const Tensor& X = t.value(v);
    require(X.n == first.n && X.h == first.h && X.w == first.w, "concat operands");
    channels += X.c;
  }
  Tensor Y(first.n, channels, first.h, first.w);
  int offset = 0;
  for (Var v : xs) {
    const Tensor& X = t.value(v);
    for (int n = 0; n < X.n; ++n)
      for (int c = 0; c < X.c; ++c)
        for (int y = 0; y < X.h; ++y)
          for (int xx = 0; xx < X.w; ++xx) Y.at(n, offset + c, y, xx) = X.at(n, c, y, xx);
    offset += X.c;
  }
  return t.push(std::move(Y), [xs](Tape& tp, int self) {
    const Tensor G = tp.grad_mut(self);
    int offset = 0;
    for (Var v : xs) {
      Tensor& gx = tp.grad_mut(v.id);
      for (int n = 0; n < gx.n; ++n)
        for (int c = 0; c < gx.c; ++c)
          for (int y = 0; y < gx.h; ++y)
            for (int xx = 0; xx < gx.w; ++xx) gx.at(n, c, y, xx) += G.at(n, offset + c, y, xx);
      offset += gx.c;
    }
  });
}

Var softmax_cross_entropy(Tape& t, Var logits, const std::vector<int>& labels) {
  const Tensor& Z = t.value(logits);
  const std::size_t cells = static_cast<std::size_t>(Z.n) * Z.h * Z.w;
  require(labels.size() == cells, "one label per sample and pixel");
  Tensor prob(Z.n, Z.c, Z.h, Z.w);
  double loss = 0.0;
  std::size_t cell = 0;
  for (int n = 0; n < Z.n; ++n)
    for (int y = 0; y < Z.h; ++y)
      for (int xx = 0; xx < Z.w; ++xx, ++cell) {
        const int label = labels[cell];
        require(label >= 0 && label < Z.c, "label out of range");
        double mx = Z.at(n, 0, y, xx);
        for (int c = 1; c < Z.c; ++c) mx = std::max(mx, Z.at(n, c, y, xx));
        double denom = 0.0;
        for (int c = 0; c < Z.c; ++c) denom += std::exp(Z.at(n, c, y, xx) - mx);
        for (int c = 0; c < Z.c; ++c) prob.at(n, c, y, xx) = std::exp(Z.at(n, c, y, xx) - mx) / denom;
        loss -= Z.at(n, label, y, xx) - mx - std::log(denom);
      }
  const double inv = 1.0 / static_cast<double>(cells);
  Tensor out(1, 1, 1, 1, loss * inv);
  return t.push(std::move(out), [logits, labels, prob, inv](Tape& tp, int self) {
    const double g = tp.grad_mut(self).data[0] * inv;
    Tensor& gz = tp.grad_mut(logits.id);
    std::size_t cell = 0;
    for (int n = 0; n < gz.n; ++n)
      for (int y = 0; y < gz.h; ++y)
        for (int xx = 0; xx < gz.w; ++xx, ++cell)
          for (int c = 0; c < gz.c; ++c) {
            const double target = c == labels[cell] ? 1.0 : 0.0;
            gz.at(n, c, y, xx) += g * (prob.at(n, c, y, xx) - target);
          }
  });
}

Var weighted_sum(Tape& t, const std::vector<Var>& xs, const std::vector<double>& weights) {
  require(xs.size() == weights.size(), "one weight per term");
  double s = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    require(t.value(xs[k]).size() == 1, "weighted sum of scalars");
    s += weights[k] * t.value(xs[k]).data[0];
  }
  return t.push(Tensor(1, 1, 1, 1, s), [xs, weights](Tape& tp, int self) {
    const double g = tp.grad_mut(self).data[0];
    for (std::size_t k = 0; k < xs.size(); ++k) tp.grad_mut(xs[k].id).data[0] += g * weights[k];
  });
}

}  // namespace logdense::ad
