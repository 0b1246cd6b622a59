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
#include <type_traits>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/random.hpp"
#include "sedkit/common/tensor.hpp"
#include "sedkit/model/kernels.hpp"

// Convolutional building blocks. Activations use the layout
// [batch, channel, freq, time] so the innermost loops run along time.

namespace sedkit::model {

// ---------------------------------------------------------------------------
// Frequency dynamic convolution

template <typename T>
struct FdyCache {
  Tensor<T> input;  // [B, Cin, F, T]
  Tensor<T> desc;   // [B, Cin, F], time-averaged input
  Tensor<T> att;    // [B, K, F]
};

/// Per-frequency softmax weights over the K basis kernels, computed from the
/// time-averaged input through one linear map shared across frequencies.
template <typename T>
Tensor<T> FdyAttention(const Tensor<T>& x, const Tensor<T>& att_weight, const Tensor<T>& att_bias,
                       double temperature, Tensor<T>* desc_out = nullptr) {
  const std::size_t B = x.dim(0), Cin = x.dim(1), F = x.dim(2), Tm = x.dim(3);
  const std::size_t K = att_weight.dim(0);
  if (att_weight.dim(1) != Cin) Fail(ErrorKind::kShape, "FDY attention expects {} input channels", att_weight.dim(1));
  Tensor<T> desc({B, Cin, F});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < Cin; ++c)
      for (std::size_t f = 0; f < F; ++f) {
        desc.at(b, c, f) = Sum(&x.at(b, c, f, 0), Tm) / static_cast<T>(Tm);
      }
  Tensor<T> att({B, K, F});
  std::vector<T> logits(K);
  const T inv_temp = static_cast<T>(1.0 / temperature);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t f = 0; f < F; ++f) {
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t k = 0; k < K; ++k) {
        T z = att_bias[k];
        for (std::size_t c = 0; c < Cin; ++c) z += att_weight.at(k, c) * desc.at(b, c, f);
        logits[k] = z * inv_temp;
        mx = std::max(mx, logits[k]);
      }
      T total = 0;
      for (std::size_t k = 0; k < K; ++k) {
        logits[k] = std::exp(logits[k] - mx);
        total += logits[k];
      }
      for (std::size_t k = 0; k < K; ++k) att.at(b, k, f) = logits[k] / total;
    }
  }
  if (desc_out) *desc_out = std::move(desc);
  return att;
}

namespace detail {

/// 3x3 same-padded convolution of one (batch, freq) output column with a
/// weight set specific to that column. weight: [Cout][Cin][3 time][3 freq].
template <typename T>
void ConvColumn(const Tensor<T>& x, std::size_t b, std::size_t f, const T* weight, const T* bias,
                std::size_t cout, Tensor<T>& y) {
  const std::size_t Cin = x.dim(1), F = x.dim(2), Tm = x.dim(3);
  for (std::size_t co = 0; co < cout; ++co) {
    T* out = &y.at(b, co, f, 0);
    std::fill(out, out + Tm, bias[co]);
    for (std::size_t ci = 0; ci < Cin; ++ci) {
      for (std::size_t df = 0; df < 3; ++df) {
        const auto fs = static_cast<std::ptrdiff_t>(f) + static_cast<std::ptrdiff_t>(df) - 1;
        if (fs < 0 || fs >= static_cast<std::ptrdiff_t>(F)) continue;
        const T* row = &x.at(b, ci, static_cast<std::size_t>(fs), 0);
        for (std::size_t dt = 0; dt < 3; ++dt) {
          const T w = weight[((co * Cin + ci) * 3 + dt) * 3 + df];
          // out[t] += w * row[t + dt - 1] over valid t.
          const std::size_t t0 = dt == 0 ? 1 : 0;
          const std::size_t t1 = dt == 2 ? Tm - 1 : Tm;
          const T* src = row + static_cast<std::ptrdiff_t>(dt) - 1;
          for (std::size_t t = t0; t < t1; ++t) out[t] += w * src[t];
        }
      }
    }
  }
}

/// Backward of ConvColumn: accumulates dx and returns dweight/dbias for the
/// column in the supplied buffers (overwritten).
template <typename T>
void ConvColumnBackward(const Tensor<T>& x, std::size_t b, std::size_t f, const T* weight,
                        std::size_t cout, const Tensor<T>& dy, Tensor<T>& dx, T* dweight, T* dbias) {
  const std::size_t Cin = x.dim(1), F = x.dim(2), Tm = x.dim(3);
  for (std::size_t co = 0; co < cout; ++co) {
    const T* g = &dy.at(b, co, f, 0);
    dbias[co] = Sum(g, Tm);
    for (std::size_t ci = 0; ci < Cin; ++ci) {
      for (std::size_t df = 0; df < 3; ++df) {
        const std::size_t widx_base = (co * Cin + ci) * 3;
        const auto fs = static_cast<std::ptrdiff_t>(f) + static_cast<std::ptrdiff_t>(df) - 1;
        if (fs < 0 || fs >= static_cast<std::ptrdiff_t>(F)) {
          for (std::size_t dt = 0; dt < 3; ++dt) dweight[(widx_base + dt) * 3 + df] = 0;
          continue;
        }
        const T* row = &x.at(b, ci, static_cast<std::size_t>(fs), 0);
        T* drow = &dx.at(b, ci, static_cast<std::size_t>(fs), 0);
        for (std::size_t dt = 0; dt < 3; ++dt) {
          const std::size_t t0 = dt == 0 ? 1 : 0;
          const std::size_t t1 = dt == 2 ? Tm - 1 : Tm;
          const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(dt) - 1;
          const std::size_t widx = (widx_base + dt) * 3 + df;
          dweight[widx] = Dot(g + t0, row + t0 + shift, t1 - t0);
          Axpy(weight[widx], g + t0, drow + t0 + shift, t1 - t0);
        }
      }
    }
  }
}

}  // namespace detail

/// Plain 3x3 convolution, weight [Cout, Cin, 3, 3], bias [Cout]. Shares the
/// arithmetic path of the dynamic convolution.
template <typename T>
Tensor<T> Conv3x3Forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  const std::size_t B = x.dim(0), F = x.dim(2), Tm = x.dim(3), Cout = weight.dim(0);
  Tensor<T> y({B, Cout, F, Tm});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t f = 0; f < F; ++f) detail::ConvColumn(x, b, f, weight.data(), bias.data(), Cout, y);
  return y;
}

/// weight [K, Cout, Cin, 3, 3], bias [K, Cout]. Output at frequency f uses
/// the kernel sum_k att[k, f] * weight[k] (and the same mix of biases).
template <typename T>
Tensor<T> FdyConvForward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                         const Tensor<T>& att_weight, const Tensor<T>& att_bias, double temperature,
                         std::type_identity_t<FdyCache<T>>* cache = nullptr) {
  if (x.rank() != 4) Fail(ErrorKind::kShape, "FDY conv input must be rank 4");
  const std::size_t B = x.dim(0), Cin = x.dim(1), F = x.dim(2), Tm = x.dim(3);
  const std::size_t K = weight.dim(0), Cout = weight.dim(1);
  if (weight.dim(2) != Cin) {
    Fail(ErrorKind::kShape, "FDY conv expects {} input channels, got {}", weight.dim(2), Cin);
  }
  Tensor<T> desc;
  Tensor<T> att = FdyAttention(x, att_weight, att_bias, temperature, &desc);
  Tensor<T> y({B, Cout, F, Tm});
  const std::size_t wsize = Cout * Cin * 9;
  std::vector<T> w_eff(wsize), b_eff(Cout);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t f = 0; f < F; ++f) {
      std::fill(w_eff.begin(), w_eff.end(), T(0));
      std::fill(b_eff.begin(), b_eff.end(), T(0));
      for (std::size_t k = 0; k < K; ++k) {
        const T a = att.at(b, k, f);
        Axpy(a, weight.data() + k * wsize, w_eff.data(), wsize);
        Axpy(a, bias.data() + k * Cout, b_eff.data(), Cout);
      }
      detail::ConvColumn(x, b, f, w_eff.data(), b_eff.data(), Cout, y);
    }
  }
  if (cache) {
    cache->input = x;
    cache->desc = std::move(desc);
    cache->att = std::move(att);
  }
  return y;
}

template <typename T>
struct FdyGrads {
  Tensor<T>* weight;
  Tensor<T>* bias;
  Tensor<T>* att_weight;
  Tensor<T>* att_bias;
};

template <typename T>
Tensor<T> FdyConvBackward(const FdyCache<T>& cache, const Tensor<T>& weight, const Tensor<T>& bias,
                          const Tensor<T>& att_weight, double temperature, const Tensor<T>& dy,
                          FdyGrads<T> grads) {
  const Tensor<T>& x = cache.input;
  const std::size_t B = x.dim(0), Cin = x.dim(1), F = x.dim(2), Tm = x.dim(3);
  const std::size_t K = weight.dim(0), Cout = weight.dim(1);
  const std::size_t wsize = Cout * Cin * 9;
  Tensor<T> dx(x.shape());
  Tensor<T> datt({B, K, F});
  std::vector<T> w_eff(wsize), b_eff(Cout), dw_eff(wsize), db_eff(Cout);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t f = 0; f < F; ++f) {
      std::fill(w_eff.begin(), w_eff.end(), T(0));
      std::fill(b_eff.begin(), b_eff.end(), T(0));
      for (std::size_t k = 0; k < K; ++k) {
        const T a = cache.att.at(b, k, f);
        Axpy(a, weight.data() + k * wsize, w_eff.data(), wsize);
        Axpy(a, bias.data() + k * Cout, b_eff.data(), Cout);
      }
      detail::ConvColumnBackward(x, b, f, w_eff.data(), Cout, dy, dx, dw_eff.data(), db_eff.data());
      for (std::size_t k = 0; k < K; ++k) {
        const T a = cache.att.at(b, k, f);
        Axpy(a, dw_eff.data(), grads.weight->data() + k * wsize, wsize);
        Axpy(a, db_eff.data(), grads.bias->data() + k * Cout, Cout);
        datt.at(b, k, f) = Dot(weight.data() + k * wsize, dw_eff.data(), wsize) +
                           Dot(bias.data() + k * Cout, db_eff.data(), Cout);
      }
    }
  }
  // Softmax with temperature, then the shared linear map, then time mean.
  const T inv_temp = static_cast<T>(1.0 / temperature);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t f = 0; f < F; ++f) {
      T inner = 0;
      for (std::size_t k = 0; k < K; ++k) inner += cache.att.at(b, k, f) * datt.at(b, k, f);
      for (std::size_t k = 0; k < K; ++k) {
        const T dlogit = cache.att.at(b, k, f) * (datt.at(b, k, f) - inner) * inv_temp;
        (*grads.att_bias)[k] += dlogit;
        for (std::size_t c = 0; c < Cin; ++c) {
          grads.att_weight->at(k, c) += dlogit * cache.desc.at(b, c, f);
          const T ddesc = att_weight.at(k, c) * dlogit / static_cast<T>(Tm);
          T* drow = &dx.at(b, c, f, 0);
          for (std::size_t t = 0; t < Tm; ++t) drow[t] += ddesc;
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Batch normalization over (batch, freq, time) per channel

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

template <typename T>
struct BatchNormCache {
  Tensor<T> xhat;
  std::vector<T> inv_std;
  std::vector<double> batch_mean;
  std::vector<double> batch_var;  // biased
  std::size_t count = 0;
};

/// With use_batch_stats the statistics come from x (training); otherwise
/// from the running estimates (evaluation).
template <typename T>
Tensor<T> BatchNormForward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                           const Tensor<T>& running_mean, const Tensor<T>& running_var,
                           bool use_batch_stats, std::type_identity_t<BatchNormCache<T>>* cache = nullptr) {
  const std::size_t B = x.dim(0), C = x.dim(1), inner = x.dim(2) * x.dim(3);
  const std::size_t n = B * inner;
  Tensor<T> y(x.shape());
  if (cache) {
    cache->xhat = Tensor<T>(x.shape());
    cache->inv_std.assign(C, T(0));
    cache->batch_mean.assign(C, 0.0);
    cache->batch_var.assign(C, 0.0);
    cache->count = n;
  }
  for (std::size_t c = 0; c < C; ++c) {
    T mean, var;
    if (use_batch_stats) {
      T s = 0;
      for (std::size_t b = 0; b < B; ++b) s += Sum(&x.at(b, c, 0, 0), inner);
      mean = s / static_cast<T>(n);
      T v = 0;
      for (std::size_t b = 0; b < B; ++b) {
        const T* p = &x.at(b, c, 0, 0);
        T acc = 0;
        for (std::size_t i = 0; i < inner; ++i) {
          const T d = p[i] - mean;
          acc += d * d;
        }
        v += acc;
      }
      var = v / static_cast<T>(n);
    } else {
      mean = running_mean[c];
      var = running_var[c];
    }
    const T inv_std = T(1) / std::sqrt(var + static_cast<T>(kBatchNormEps));
    const T g = gamma[c], bt = beta[c];
    for (std::size_t b = 0; b < B; ++b) {
      const T* p = &x.at(b, c, 0, 0);
      T* q = &y.at(b, c, 0, 0);
      T* h = cache ? &cache->xhat.at(b, c, 0, 0) : nullptr;
      for (std::size_t i = 0; i < inner; ++i) {
        const T xh = (p[i] - mean) * inv_std;
        if (h) h[i] = xh;
        q[i] = g * xh + bt;
      }
    }
    if (cache) {
      cache->inv_std[c] = inv_std;
      cache->batch_mean[c] = static_cast<double>(mean);
      cache->batch_var[c] = static_cast<double>(var);
    }
  }
  return y;
}

/// Backward for the batch-statistics path.
template <typename T>
Tensor<T> BatchNormBackward(const BatchNormCache<T>& cache, const Tensor<T>& gamma,
                            const Tensor<T>& dy, Tensor<T>& dgamma, Tensor<T>& dbeta) {
  const std::size_t B = dy.dim(0), C = dy.dim(1), inner = dy.dim(2) * dy.dim(3);
  const T n = static_cast<T>(cache.count);
  Tensor<T> dx(dy.shape());
  for (std::size_t c = 0; c < C; ++c) {
    T sum_dy = 0, sum_dy_xhat = 0;
    for (std::size_t b = 0; b < B; ++b) {
      const T* g = &dy.at(b, c, 0, 0);
      const T* h = &cache.xhat.at(b, c, 0, 0);
      sum_dy += Sum(g, inner);
      sum_dy_xhat += Dot(g, h, inner);
    }
    dgamma[c] += sum_dy_xhat;
    dbeta[c] += sum_dy;
    const T scale = gamma[c] * cache.inv_std[c] / n;
    for (std::size_t b = 0; b < B; ++b) {
      const T* g = &dy.at(b, c, 0, 0);
      const T* h = &cache.xhat.at(b, c, 0, 0);
      T* d = &dx.at(b, c, 0, 0);
      for (std::size_t i = 0; i < inner; ++i) {
        d[i] = scale * (n * g[i] - sum_dy - h[i] * sum_dy_xhat);
      }
    }
  }
  return dx;
}

/// running = (1 - m) * running + m * batch, with the unbiased variance.
template <typename T>
void UpdateRunningStats(const BatchNormCache<T>& cache, Tensor<T>& running_mean,
                        Tensor<T>& running_var, double momentum = kBatchNormMomentum) {
  const double n = static_cast<double>(cache.count);
  const double unbias = n > 1 ? n / (n - 1) : 1.0;
  for (std::size_t c = 0; c < cache.batch_mean.size(); ++c) {
    running_mean[c] = static_cast<T>((1 - momentum) * running_mean[c] + momentum * cache.batch_mean[c]);
    running_var[c] =
        static_cast<T>((1 - momentum) * running_var[c] + momentum * cache.batch_var[c] * unbias);
  }
}

// ---------------------------------------------------------------------------
// SiLU

template <typename T>
Tensor<T> SiluForward(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * Sigmoid(x[i]);
  return y;
}

template <typename T>
Tensor<T> SiluBackward(const Tensor<T>& x, const Tensor<T>& dy) {
  Tensor<T> dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T s = Sigmoid(x[i]);
    dx[i] = dy[i] * s * (T(1) + x[i] * (T(1) - s));
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Depthwise and pointwise convolutions used by large kernel attention

/// Same-padded depthwise conv; weight [C, k, k] indexed [c][freq][time].
template <typename T>
Tensor<T> DepthwiseForward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                           std::size_t dilation) {
  const std::size_t B = x.dim(0), C = x.dim(1), F = x.dim(2), Tm = x.dim(3);
  const std::size_t k = weight.dim(1);
  const auto pad = static_cast<std::ptrdiff_t>(dilation * (k - 1) / 2);
  Tensor<T> y(x.shape());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t f = 0; f < F; ++f) {
        T* out = &y.at(b, c, f, 0);
        std::fill(out, out + Tm, bias[c]);
        for (std::size_t i = 0; i < k; ++i) {
          const auto fs = static_cast<std::ptrdiff_t>(f) + static_cast<std::ptrdiff_t>(i * dilation) - pad;
          if (fs < 0 || fs >= static_cast<std::ptrdiff_t>(F)) continue;
          const T* row = &x.at(b, c, static_cast<std::size_t>(fs), 0);
          for (std::size_t j = 0; j < k; ++j) {
            const T w = weight.at(c, i, j);
            const auto shift = static_cast<std::ptrdiff_t>(j * dilation) - pad;
            const auto t0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -shift));
            const auto t1 = static_cast<std::size_t>(
                std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(Tm) - shift, 0,
                                           static_cast<std::ptrdiff_t>(Tm)));
            if (t0 >= t1) continue;
            Axpy(w, row + static_cast<std::ptrdiff_t>(t0) + shift, out + t0, t1 - t0);
          }
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> DepthwiseBackward(const Tensor<T>& x, const Tensor<T>& weight, std::size_t dilation,
                            const Tensor<T>& dy, Tensor<T>& dweight, Tensor<T>& dbias) {
  const std::size_t B = x.dim(0), C = x.dim(1), F = x.dim(2), Tm = x.dim(3);
  const std::size_t k = weight.dim(1);
  const auto pad = static_cast<std::ptrdiff_t>(dilation * (k - 1) / 2);
  Tensor<T> dx(x.shape());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t f = 0; f < F; ++f) {
        const T* g = &dy.at(b, c, f, 0);
        dbias[c] += Sum(g, Tm);
        for (std::size_t i = 0; i < k; ++i) {
          const auto fs = static_cast<std::ptrdiff_t>(f) + static_cast<std::ptrdiff_t>(i * dilation) - pad;
          if (fs < 0 || fs >= static_cast<std::ptrdiff_t>(F)) continue;
          const T* row = &x.at(b, c, static_cast<std::size_t>(fs), 0);
          T* drow = &dx.at(b, c, static_cast<std::size_t>(fs), 0);
          for (std::size_t j = 0; j < k; ++j) {
            const auto shift = static_cast<std::ptrdiff_t>(j * dilation) - pad;
            const auto t0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -shift));
            const auto t1 = static_cast<std::size_t>(
                std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(Tm) - shift, 0,
                                           static_cast<std::ptrdiff_t>(Tm)));
            if (t0 >= t1) continue;
            dweight.at(c, i, j) += Dot(g + t0, row + static_cast<std::ptrdiff_t>(t0) + shift, t1 - t0);
            Axpy(weight.at(c, i, j), g + t0, drow + static_cast<std::ptrdiff_t>(t0) + shift, t1 - t0);
          }
        }
      }
    }
  }
  return dx;
}

/// 1x1 convolution, weight [Cout, Cin].
template <typename T>
Tensor<T> PointwiseForward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  const std::size_t B = x.dim(0), Cin = x.dim(1), inner = x.dim(2) * x.dim(3);
  const std::size_t Cout = weight.dim(0);
  Tensor<T> y({B, Cout, x.dim(2), x.dim(3)});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t co = 0; co < Cout; ++co) {
      T* out = &y.at(b, co, 0, 0);
      std::fill(out, out + inner, bias[co]);
      for (std::size_t ci = 0; ci < Cin; ++ci) {
        Axpy(weight.at(co, ci), &x.at(b, ci, 0, 0), out, inner);
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> PointwiseBackward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& dy,
                            Tensor<T>& dweight, Tensor<T>& dbias) {
  const std::size_t B = x.dim(0), Cin = x.dim(1), inner = x.dim(2) * x.dim(3);
  const std::size_t Cout = weight.dim(0);
  Tensor<T> dx(x.shape());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t co = 0; co < Cout; ++co) {
      const T* g = &dy.at(b, co, 0, 0);
      dbias[co] += Sum(g, inner);
      for (std::size_t ci = 0; ci < Cin; ++ci) {
        dweight.at(co, ci) += Dot(g, &x.at(b, ci, 0, 0), inner);
        Axpy(weight.at(co, ci), g, &dx.at(b, ci, 0, 0), inner);
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Large kernel attention: out = x * pw(dilated_dw(dw(x)))

template <typename T>
struct LkaParams {
  const Tensor<T>& dw_weight;
  const Tensor<T>& dw_bias;
  const Tensor<T>& dil_weight;
  const Tensor<T>& dil_bias;
  const Tensor<T>& pw_weight;
  const Tensor<T>& pw_bias;
  std::size_t dilation;
};

template <typename T>
struct LkaCache {
  Tensor<T> input;
  Tensor<T> dw_out;
  Tensor<T> dil_out;
  Tensor<T> attention;
};

template <typename T>
Tensor<T> LkaForward(const Tensor<T>& x, const LkaParams<T>& p, std::type_identity_t<LkaCache<T>>* cache = nullptr) {
  Tensor<T> a1 = DepthwiseForward(x, p.dw_weight, p.dw_bias, 1);
  Tensor<T> a2 = DepthwiseForward(a1, p.dil_weight, p.dil_bias, p.dilation);
  Tensor<T> attn = PointwiseForward(a2, p.pw_weight, p.pw_bias);
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * attn[i];
  if (cache) {
    cache->input = x;
    cache->dw_out = std::move(a1);
    cache->dil_out = std::move(a2);
    cache->attention = std::move(attn);
  }
  return y;
}

template <typename T>
struct LkaGrads {
  Tensor<T>* dw_weight;
  Tensor<T>* dw_bias;
  Tensor<T>* dil_weight;
  Tensor<T>* dil_bias;
  Tensor<T>* pw_weight;
  Tensor<T>* pw_bias;
};

template <typename T>
Tensor<T> LkaBackward(const LkaCache<T>& cache, const LkaParams<T>& p, const Tensor<T>& dy,
                      LkaGrads<T> g) {
  Tensor<T> dx(dy.shape());
  Tensor<T> dattn(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) {
    dx[i] = dy[i] * cache.attention[i];
    dattn[i] = dy[i] * cache.input[i];
  }
  Tensor<T> da2 = PointwiseBackward(cache.dil_out, p.pw_weight, dattn, *g.pw_weight, *g.pw_bias);
  Tensor<T> da1 = DepthwiseBackward(cache.dw_out, p.dil_weight, p.dilation, da2, *g.dil_weight, *g.dil_bias);
  Tensor<T> dx2 = DepthwiseBackward(cache.input, p.dw_weight, 1, da1, *g.dw_weight, *g.dw_bias);
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dx2[i];
  return dx;
}

// ---------------------------------------------------------------------------
// Average pooling and dropout

template <typename T>
Tensor<T> AvgPoolForward(const Tensor<T>& x, std::size_t freq_pool, std::size_t time_pool) {
  const std::size_t B = x.dim(0), C = x.dim(1), F = x.dim(2), Tm = x.dim(3);
  if (F % freq_pool != 0 || Tm % time_pool != 0) {
    Fail(ErrorKind::kShape, "pooling {}x{} does not divide {}x{}", freq_pool, time_pool, F, Tm);
  }
  const std::size_t Fo = F / freq_pool, To = Tm / time_pool;
  const T scale = T(1) / static_cast<T>(freq_pool * time_pool);
  Tensor<T> y({B, C, Fo, To});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t f = 0; f < F; ++f) {
        const T* row = &x.at(b, c, f, 0);
        T* out = &y.at(b, c, f / freq_pool, 0);
        for (std::size_t t = 0; t < Tm; ++t) out[t / time_pool] += row[t];
      }
  for (auto& v : y.values()) v *= scale;
  return y;
}

template <typename T>
Tensor<T> AvgPoolBackward(const std::vector<std::size_t>& input_shape, std::size_t freq_pool,
                          std::size_t time_pool, const Tensor<T>& dy) {
  Tensor<T> dx(input_shape);
  const std::size_t B = dx.dim(0), C = dx.dim(1), F = dx.dim(2), Tm = dx.dim(3);
  const T scale = T(1) / static_cast<T>(freq_pool * time_pool);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t f = 0; f < F; ++f) {
        const T* g = &dy.at(b, c, f / freq_pool, 0);
        T* d = &dx.at(b, c, f, 0);
        for (std::size_t t = 0; t < Tm; ++t) d[t] = g[t / time_pool] * scale;
      }
  return dx;
}

/// Inverted dropout mask: 0 with probability p, 1/(1-p) otherwise.
template <typename T>
Tensor<T> DropoutMask(const std::vector<std::size_t>& shape, double p, Rng& rng) {
  Tensor<T> mask(shape);
  const T keep = static_cast<T>(1.0 / (1.0 - p));
  for (auto& m : mask.values()) m = Uniform01(rng) < p ? T(0) : keep;
  return mask;
}

}  // namespace sedkit::model
