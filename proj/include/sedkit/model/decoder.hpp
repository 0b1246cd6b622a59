// Copyright 2026 The sedkit Authors. All Rights Reserved.
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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/tensor.hpp"
#include "sedkit/model/kernels.hpp"
#include "sedkit/model/parameters.hpp"

// Bidirectional GRU decoder with a frame classifier and attention pooling.
// Gate order within the stacked weights is (reset, update, new).

namespace sedkit::model {

namespace detail {

/// y[t] = W x[t] + b for x [T, I], W [O, I].
template <typename T>
Tensor<T> Linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  const std::size_t Tm = x.dim(0), I = x.dim(1), O = w.dim(0);
  if (w.dim(1) != I) Fail(ErrorKind::kShape, "linear layer expects width {}, got {}", w.dim(1), I);
  Tensor<T> y({Tm, O});
  for (std::size_t t = 0; t < Tm; ++t) {
    const T* row = &x.at(t, 0);
    for (std::size_t o = 0; o < O; ++o) y.at(t, o) = Dot(row, &w.at(o, 0), I) + b[o];
  }
  return y;
}

/// Accumulates dW, db and returns dx for Linear.
template <typename T>
Tensor<T> LinearBackward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>& dw,
                         Tensor<T>& db) {
  const std::size_t Tm = x.dim(0), I = x.dim(1), O = w.dim(0);
  Tensor<T> dx({Tm, I});
  for (std::size_t t = 0; t < Tm; ++t) {
    const T* row = &x.at(t, 0);
    T* drow = &dx.at(t, 0);
    for (std::size_t o = 0; o < O; ++o) {
      const T g = dy.at(t, o);
      if (g == T(0)) continue;
      db[o] += g;
      Axpy(g, row, &dw.at(o, 0), I);
      Axpy(g, &w.at(o, 0), drow, I);
    }
  }
  return dx;
}

}  // namespace detail

template <typename T>
struct GruDirectionCache {
  Tensor<T> h_prev;  // [T, H], state entering each step
  Tensor<T> r, z, n, gh_n;
};

/// One direction over precomputed input projections gi [T, 3H].
template <typename T>
Tensor<T> GruDirectionForward(const Tensor<T>& gi, const Tensor<T>& w_hh, const Tensor<T>& b_hh,
                              bool reverse, GruDirectionCache<T>* cache) {
  const std::size_t Tm = gi.dim(0), H = w_hh.dim(1);
  Tensor<T> out({Tm, H});
  std::vector<T> h(H, T(0)), gh(3 * H);
  if (cache) {
    for (auto* t : {&cache->h_prev, &cache->r, &cache->z, &cache->n, &cache->gh_n}) *t = Tensor<T>({Tm, H});
  }
  for (std::size_t s = 0; s < Tm; ++s) {
    const std::size_t t = reverse ? Tm - 1 - s : s;
    for (std::size_t g = 0; g < 3 * H; ++g) gh[g] = Dot(&w_hh.at(g, 0), h.data(), H) + b_hh[g];
    const T* x = &gi.at(t, 0);
    if (cache) std::copy(h.begin(), h.end(), &cache->h_prev.at(t, 0));
    for (std::size_t j = 0; j < H; ++j) {
      const T r = Sigmoid(x[j] + gh[j]);
      const T z = Sigmoid(x[H + j] + gh[H + j]);
      const T n = std::tanh(x[2 * H + j] + r * gh[2 * H + j]);
      if (cache) {
        cache->r.at(t, j) = r;
        cache->z.at(t, j) = z;
        cache->n.at(t, j) = n;
        cache->gh_n.at(t, j) = gh[2 * H + j];
      }
      h[j] = (T(1) - z) * n + z * h[j];
    }
    std::copy(h.begin(), h.end(), &out.at(t, 0));
  }
  return out;
}

/// Returns d gi [T, 3H]; accumulates recurrent weight gradients.
template <typename T>
Tensor<T> GruDirectionBackward(const GruDirectionCache<T>& c, const Tensor<T>& w_hh, bool reverse,
                               const Tensor<T>& dout, Tensor<T>& dw_hh, Tensor<T>& db_hh) {
  const std::size_t Tm = dout.dim(0), H = w_hh.dim(1);
  Tensor<T> dgi({Tm, 3 * H});
  std::vector<T> dh(H, T(0)), dgh(3 * H), dh_next(H);
  for (std::size_t s = Tm; s-- > 0;) {
    const std::size_t t = reverse ? Tm - 1 - s : s;
    for (std::size_t j = 0; j < H; ++j) dh[j] += dout.at(t, j);
    T* dx = &dgi.at(t, 0);
    for (std::size_t j = 0; j < H; ++j) {
      const T r = c.r.at(t, j), z = c.z.at(t, j), n = c.n.at(t, j), hp = c.h_prev.at(t, j);
      const T dn = dh[j] * (T(1) - z);
      const T dz = dh[j] * (hp - n);
      const T dn_pre = dn * (T(1) - n * n);
      const T dr = dn_pre * c.gh_n.at(t, j);
      const T dr_pre = dr * r * (T(1) - r);
      const T dz_pre = dz * z * (T(1) - z);
      dx[j] = dr_pre;
      dx[H + j] = dz_pre;
      dx[2 * H + j] = dn_pre;
      dgh[j] = dr_pre;
      dgh[H + j] = dz_pre;
      dgh[2 * H + j] = dn_pre * r;
      dh_next[j] = dh[j] * z;
    }
    const T* hp = &c.h_prev.at(t, 0);
    for (std::size_t g = 0; g < 3 * H; ++g) {
      if (dgh[g] == T(0)) continue;
      db_hh[g] += dgh[g];
      Axpy(dgh[g], hp, &dw_hh.at(g, 0), H);
      Axpy(dgh[g], &w_hh.at(g, 0), dh_next.data(), H);
    }
    dh.swap(dh_next);
  }
  return dgi;
}

template <typename T>
struct DecoderCache {
  Tensor<T> inputs[2];  // input of each recurrent layer
  GruDirectionCache<T> dirs[2][2];
  Tensor<T> hidden;  // [T, 2H], output of the last layer
  Tensor<T> strong;
  Tensor<T> attention;  // softmax over time, [T, C]
};

template <typename T>
struct DecoderOutput {
  Tensor<T> strong_logits;  // [T, C]
  Tensor<T> strong;         // [T, C]
  Tensor<T> weak;           // [C]
};

/// Decoder over one clip, x [T, I]. prefix is "main" or "aux".
template <typename T>
DecoderOutput<T> DecoderForward(const ParameterSet<T>& params, const std::string& prefix,
                                const Tensor<T>& x, DecoderCache<T>* cache = nullptr) {
  if (x.rank() != 2) Fail(ErrorKind::kShape, "decoder input must be [frames, width]");
  Tensor<T> layer_in = x;
  for (std::size_t layer = 0; layer < 2; ++layer) {
    const std::string base = prefix + ".gru" + std::to_string(layer) + ".";
    Tensor<T> outs[2];
    for (std::size_t d = 0; d < 2; ++d) {
      const std::string p = base + (d == 0 ? "fwd." : "bwd.");
      Tensor<T> gi = detail::Linear(layer_in, params.Get(p + "w_ih"), params.Get(p + "b_ih"));
      outs[d] = GruDirectionForward(gi, params.Get(p + "w_hh"), params.Get(p + "b_hh"), d == 1,
                                    cache ? &cache->dirs[layer][d] : nullptr);
    }
    const std::size_t Tm = layer_in.dim(0), H = outs[0].dim(1);
    Tensor<T> cat({Tm, 2 * H});
    for (std::size_t t = 0; t < Tm; ++t) {
      std::copy_n(&outs[0].at(t, 0), H, &cat.at(t, 0));
      std::copy_n(&outs[1].at(t, 0), H, &cat.at(t, H));
    }
    if (cache) cache->inputs[layer] = std::move(layer_in);
    layer_in = std::move(cat);
  }
  const Tensor<T>& hidden = layer_in;
  DecoderOutput<T> out;
  out.strong_logits =
      detail::Linear(hidden, params.Get(prefix + ".classifier.weight"), params.Get(prefix + ".classifier.bias"));
  Tensor<T> att_logits =
      detail::Linear(hidden, params.Get(prefix + ".attention.weight"), params.Get(prefix + ".attention.bias"));
  const std::size_t Tm = hidden.dim(0), C = out.strong_logits.dim(1);
  out.strong = Tensor<T>({Tm, C});
  for (std::size_t i = 0; i < out.strong.size(); ++i) out.strong[i] = Sigmoid(out.strong_logits[i]);
  Tensor<T> att({Tm, C});
  out.weak = Tensor<T>({C});
  for (std::size_t c = 0; c < C; ++c) {
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t t = 0; t < Tm; ++t) mx = std::max(mx, att_logits.at(t, c));
    T total = 0;
    for (std::size_t t = 0; t < Tm; ++t) {
      att.at(t, c) = std::exp(att_logits.at(t, c) - mx);
      total += att.at(t, c);
    }
    T weak = 0;
    for (std::size_t t = 0; t < Tm; ++t) {
      att.at(t, c) /= total;
      weak += att.at(t, c) * out.strong.at(t, c);
    }
    out.weak[c] = weak;
  }
  if (cache) {
    cache->hidden = hidden;
    cache->strong = out.strong;
    cache->attention = std::move(att);
  }
  return out;
}

/// d_logits [T, C] is the gradient w.r.t. the strong logits; d_weak [C]
/// w.r.t. the pooled clip probabilities. Returns d x.
template <typename T>
Tensor<T> DecoderBackward(const ParameterSet<T>& params, const std::string& prefix,
                          const DecoderCache<T>& cache, const Tensor<T>& d_logits,
                          const Tensor<T>& d_weak, ParameterSet<T>& grads) {
  const std::size_t Tm = cache.hidden.dim(0), C = cache.strong.dim(1);
  Tensor<T> dl = d_logits;
  Tensor<T> da({Tm, C});
  for (std::size_t c = 0; c < C; ++c) {
    const T gw = d_weak[c];
    if (gw == T(0)) continue;
    T inner = 0;
    for (std::size_t t = 0; t < Tm; ++t) inner += cache.attention.at(t, c) * cache.strong.at(t, c);
    for (std::size_t t = 0; t < Tm; ++t) {
      const T s = cache.attention.at(t, c), p = cache.strong.at(t, c);
      dl.at(t, c) += gw * s * p * (T(1) - p);
      da.at(t, c) = gw * s * (p - inner);
    }
  }
  Tensor<T> dh = detail::LinearBackward(cache.hidden, params.Get(prefix + ".classifier.weight"), dl,
                                        grads.Get(prefix + ".classifier.weight"),
                                        grads.Get(prefix + ".classifier.bias"));
  Tensor<T> dh2 = detail::LinearBackward(cache.hidden, params.Get(prefix + ".attention.weight"), da,
                                         grads.Get(prefix + ".attention.weight"),
                                         grads.Get(prefix + ".attention.bias"));
  for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += dh2[i];

  for (std::size_t layer = 2; layer-- > 0;) {
    const std::string base = prefix + ".gru" + std::to_string(layer) + ".";
    const Tensor<T>& in = cache.inputs[layer];
    const std::size_t H = dh.dim(1) / 2;
    Tensor<T> dx({Tm, in.dim(1)});
    for (std::size_t d = 0; d < 2; ++d) {
      const std::string p = base + (d == 0 ? "fwd." : "bwd.");
      Tensor<T> dout({Tm, H});
      for (std::size_t t = 0; t < Tm; ++t) std::copy_n(&dh.at(t, d * H), H, &dout.at(t, 0));
      Tensor<T> dgi = GruDirectionBackward(cache.dirs[layer][d], params.Get(p + "w_hh"), d == 1, dout,
                                           grads.Get(p + "w_hh"), grads.Get(p + "b_hh"));
      Tensor<T> dxi = detail::LinearBackward(in, params.Get(p + "w_ih"), dgi, grads.Get(p + "w_ih"),
                                             grads.Get(p + "b_ih"));
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dxi[i];
    }
    dh = std::move(dx);
  }
  return dh;
}

}  // namespace sedkit::model
