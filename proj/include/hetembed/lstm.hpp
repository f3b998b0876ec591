// Copyright 2026 The hetembed Authors. All Rights Reserved.
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

#pragma once

// LSTM over a whole sequence as a single tape primitive.
//
// Gate rows are stacked as [input; forget; candidate; output]:
//   z_t = W x_t + U h_{t-1} + b
//   c_t = f_t * c_{t-1} + i_t * g_t
//   h_t = o_t * tanh(c_t)
// with h_{-1} = c_{-1} = 0. Backward is hand-written BPTT over cached gate
// activations.

#include <algorithm>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hetembed/autodiff.hpp"
#include "hetembed/init.hpp"
#include "hetembed/rng.hpp"

namespace hetembed {

struct LstmParams {
  ad::Parameter w;  // {4h, in}
  ad::Parameter u;  // {4h, h}
  ad::Parameter b;  // {4h}

  LstmParams() = default;
  LstmParams(const std::string& name, std::size_t input, std::size_t hidden)
      : w(name + ".w", ad::Tensor({4 * hidden, input})),
        u(name + ".u", ad::Tensor({4 * hidden, hidden})),
        b(name + ".b", ad::Tensor({4 * hidden})) {}

  std::size_t input_size() const { return w.value.shape()[1]; }
  std::size_t hidden_size() const { return u.value.shape()[1]; }

  void init_xavier(Rng& rng) {
    const auto h = hidden_size(), in = input_size();
    w.value = ad::xavier_uniform({4 * h, in}, in, h, rng);
    u.value = ad::xavier_uniform({4 * h, h}, h, h, rng);
    b.value.fill(0.0);
  }

  std::vector<ad::Parameter*> parameters() { return {&w, &u, &b}; }
};

namespace lstm_detail {

struct Cache {
  std::size_t steps = 0, hidden = 0, input = 0;
  std::vector<double> gates;  // per step: i, f, g, o (each hidden)
  std::vector<double> cells;  // per step: c_t
};

}  // namespace lstm_detail

/// Runs the LSTM over the rows of `x` ({T, in}) and returns every hidden
/// state as a {T, h} matrix.
inline ad::Var lstm_sequence(const ad::Var& x, const ad::Var& w, const ad::Var& u, const ad::Var& b) {
  using ad::Tensor;
  ad::Tape& tape = *x.tape();
  if (w.tape() != &tape || u.tape() != &tape || b.tape() != &tape)
    throw Error("lstm_sequence: operands live on different tapes");
  const auto& X = x.value();
  const auto& W = w.value();
  const auto& U = u.value();
  const auto& B = b.value();
  if (X.rank() != 2 || W.rank() != 2 || U.rank() != 2 || B.rank() != 1)
    throw DimensionError("lstm_sequence: expected x{T,in}, w{4h,in}, u{4h,h}, b{4h}");
  const auto T = X.shape()[0], in = X.shape()[1], h = U.shape()[1];
  if (W.shape()[0] != 4 * h || W.shape()[1] != in || U.shape()[0] != 4 * h || B.numel() != 4 * h)
    throw DimensionError("lstm_sequence: gate shapes " + ad::shape_str(W.shape()) + ", " +
                         ad::shape_str(U.shape()) + ", " + ad::shape_str(B.shape()) +
                         " do not match input " + ad::shape_str(X.shape()));

  auto cache = std::make_shared<lstm_detail::Cache>();
  cache->steps = T;
  cache->hidden = h;
  cache->input = in;
  cache->gates.assign(T * 4 * h, 0.0);
  cache->cells.assign(T * h, 0.0);
  Tensor H({T, h});
  std::vector<double> z(4 * h);
  for (std::size_t t = 0; t < T; ++t) {
    const double* xt = X.data() + t * in;
    const double* hp = t ? H.data() + (t - 1) * h : nullptr;
    for (std::size_t r = 0; r < 4 * h; ++r) {
      double acc = B[r];
      const double* wr = W.data() + r * in;
      for (std::size_t j = 0; j < in; ++j) acc += wr[j] * xt[j];
      if (hp) {
        const double* ur = U.data() + r * h;
        for (std::size_t j = 0; j < h; ++j) acc += ur[j] * hp[j];
      }
      z[r] = acc;
    }
    double* gt = cache->gates.data() + t * 4 * h;
    double* ct = cache->cells.data() + t * h;
    const double* cp = t ? cache->cells.data() + (t - 1) * h : nullptr;
    for (std::size_t k = 0; k < h; ++k) {
      const double ig = ad::sigmoid_value(z[k]);
      const double fg = ad::sigmoid_value(z[h + k]);
      const double gg = std::tanh(z[2 * h + k]);
      const double og = ad::sigmoid_value(z[3 * h + k]);
      gt[k] = ig;
      gt[h + k] = fg;
      gt[2 * h + k] = gg;
      gt[3 * h + k] = og;
      ct[k] = fg * (cp ? cp[k] : 0.0) + ig * gg;
      H[t * h + k] = og * std::tanh(ct[k]);
    }
  }

  const auto ix = x.id(), iw = w.id(), iu = u.id(), ib = b.id();
  return tape.record(std::move(H), [ix, iw, iu, ib, cache](ad::Tape& tp, std::size_t self) {
    const auto T = cache->steps, h = cache->hidden, in = cache->input;
    const Tensor dH = tp.grad(self);
    const auto& Hv = tp.value(self);
    const auto& X = tp.value(ix);
    const auto& W = tp.value(iw);
    const auto& U = tp.value(iu);
    std::vector<double> dW(4 * h * in, 0.0), dU(4 * h * h, 0.0), db(4 * h, 0.0), dX(T * in, 0.0);
    std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0), dz(4 * h);
    for (std::size_t t = T; t-- > 0;) {
      const double* gt = cache->gates.data() + t * 4 * h;
      const double* ct = cache->cells.data() + t * h;
      const double* cp = t ? cache->cells.data() + (t - 1) * h : nullptr;
      for (std::size_t k = 0; k < h; ++k) {
        const double ig = gt[k], fg = gt[h + k], gg = gt[2 * h + k], og = gt[3 * h + k];
        const double dh = dH[t * h + k] + dh_next[k];
        const double tc = std::tanh(ct[k]);
        const double dc = dh * og * (1.0 - tc * tc) + dc_next[k];
        const double cprev = cp ? cp[k] : 0.0;
        dz[k] = dc * gg * ig * (1.0 - ig);
        dz[h + k] = dc * cprev * fg * (1.0 - fg);
        dz[2 * h + k] = dc * ig * (1.0 - gg * gg);
        dz[3 * h + k] = dh * tc * og * (1.0 - og);
        dc_next[k] = dc * fg;
      }
      const double* xt = X.data() + t * in;
      const double* hp = t ? Hv.data() + (t - 1) * h : nullptr;
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      for (std::size_t r = 0; r < 4 * h; ++r) {
        const double g = dz[r];
        if (g == 0.0) continue;
        db[r] += g;
        double* dwr = dW.data() + r * in;
        const double* wr = W.data() + r * in;
        double* dxt = dX.data() + t * in;
        for (std::size_t j = 0; j < in; ++j) {
          dwr[j] += g * xt[j];
          dxt[j] += g * wr[j];
        }
        const double* ur = U.data() + r * h;
        double* dur = dU.data() + r * h;
        for (std::size_t j = 0; j < h; ++j) {
          if (hp) dur[j] += g * hp[j];
          dh_next[j] += g * ur[j];
        }
      }
    }
    auto add_into = [&tp](std::size_t id, const std::vector<double>& src) {
      auto& g = tp.grad(id);
      for (std::size_t i = 0; i < src.size(); ++i) g[i] += src[i];
    };
    add_into(ix, dX);
    add_into(iw, dW);
    add_into(iu, dU);
    add_into(ib, db);
  });
}

inline ad::Var lstm_sequence(const ad::Var& x, LstmParams& p) {
  ad::Tape& t = *x.tape();
  return lstm_sequence(x, t.param(p.w), t.param(p.u), t.param(p.b));
}

/// Forward and backward LSTMs with hidden size d/2 each.
struct BiLstm {
  LstmParams forward;
  LstmParams backward;

  BiLstm() = default;
  BiLstm(const std::string& name, std::size_t input, std::size_t hidden)
      : forward(name + ".fwd", input, hidden), backward(name + ".bwd", input, hidden) {}

  std::size_t output_size() const { return 2 * forward.hidden_size(); }

  void init_xavier(Rng& rng) {
    forward.init_xavier(rng);
    backward.init_xavier(rng);
  }

  std::vector<ad::Parameter*> parameters() {
    auto p = forward.parameters();
    auto q = backward.parameters();
    p.insert(p.end(), q.begin(), q.end());
    return p;
  }
};

/// Mean over positions of [forward h_t ; backward h_t]. Since the mean is
/// taken per position, it equals the concatenation of each direction's
/// mean hidden state.
inline ad::Var bilstm_mean(std::span<const ad::Var> sequence, BiLstm& lstm) {
  if (sequence.empty()) throw DimensionError("bilstm_mean of an empty sequence");
  std::vector<ad::Var> rev(sequence.rbegin(), sequence.rend());
  const auto fwd = lstm_sequence(ad::stack_rows(sequence), lstm.forward);
  const auto bwd = lstm_sequence(ad::stack_rows(rev), lstm.backward);
  return ad::concat({ad::mean_rows(fwd), ad::mean_rows(bwd)});
}

}  // namespace hetembed
