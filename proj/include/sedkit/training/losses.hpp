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
#include <cstdint>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/tensor.hpp"
#include "sedkit/datasets/labels.hpp"
#include "sedkit/model/crnn.hpp"
#include "sedkit/model/kernels.hpp"

namespace sedkit::training {

inline constexpr double kProbEps = 1e-7;

/// Segment-wise maximum over consecutive windows of 25 frames:
/// [frames, C] -> [frames / 25, C].
template <typename T>
Tensor<T> Mpa(const Tensor<T>& probs, std::size_t window = datasets::kFramesPerSegment) {
  if (probs.rank() != 2) Fail(ErrorKind::kShape, "mpa expects [frames, classes]");
  const std::size_t frames = probs.dim(0), C = probs.dim(1);
  if (frames == 0 || frames % window != 0) {
    Fail(ErrorKind::kShape, "mpa needs a multiple of {} frames, got {}", window, frames);
  }
  Tensor<T> out({frames / window, C});
  for (std::size_t s = 0; s < frames / window; ++s) {
    for (std::size_t c = 0; c < C; ++c) {
      T m = probs.at(s * window, c);
      for (std::size_t f = s * window + 1; f < (s + 1) * window; ++f) m = std::max(m, probs.at(f, c));
      out.at(s, c) = m;
    }
  }
  return out;
}

struct MaskedLoss {
  double value = 0.0;
  bool empty = false;  // no visible entry: value is 0
  std::size_t count = 0;
};

namespace detail {

template <typename T>
bool Visible(const Tensor<T>& mask, std::size_t i, std::size_t C) {
  return (mask.size() == C ? mask[i % C] : mask[i]) > T(0);
}

}  // namespace detail

/// Mean binary cross-entropy over visible entries. mask has either the
/// shape of pred or one entry per class (last axis). Probabilities are
/// clamped to [eps, 1 - eps]. grad (optional) receives d loss / d pred.
template <typename T>
MaskedLoss MaskedBce(const Tensor<T>& pred, const Tensor<T>& target, const Tensor<T>& mask,
                     Tensor<T>* grad = nullptr) {
  if (pred.shape() != target.shape()) {
    Fail(ErrorKind::kShape, "bce: pred {} vs target {}", ShapeString(pred.shape()),
         ShapeString(target.shape()));
  }
  const std::size_t C = pred.shape().back();
  if (mask.size() != C && mask.size() != pred.size()) Fail(ErrorKind::kShape, "bce: bad mask size");
  MaskedLoss out;
  for (std::size_t i = 0; i < pred.size(); ++i) out.count += detail::Visible(mask, i, C) ? 1 : 0;
  if (grad) *grad = Tensor<T>(pred.shape());
  if (out.count == 0) {
    out.empty = true;
    return out;
  }
  const double n = static_cast<double>(out.count);
  double sum = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!detail::Visible(mask, i, C)) continue;
    const double raw = pred[i];
    const double p = std::clamp(raw, kProbEps, 1.0 - kProbEps);
    const double t = target[i];
    sum -= t * std::log(p) + (1 - t) * std::log(1 - p);
    if (grad && raw == p) (*grad)[i] = static_cast<T>((p - t) / (p * (1 - p)) / n);
  }
  out.value = sum / n;
  return out;
}

/// Same loss evaluated from logits (sigmoid folded in, no clamping).
/// grad receives d loss / d logit.
template <typename T>
MaskedLoss MaskedBceWithLogits(const Tensor<T>& logits, const Tensor<T>& target, const Tensor<T>& mask,
                               Tensor<T>* grad = nullptr) {
  if (logits.shape() != target.shape()) Fail(ErrorKind::kShape, "bce: logits/target shapes differ");
  const std::size_t C = logits.shape().back();
  if (mask.size() != C && mask.size() != logits.size()) Fail(ErrorKind::kShape, "bce: bad mask size");
  MaskedLoss out;
  for (std::size_t i = 0; i < logits.size(); ++i) out.count += detail::Visible(mask, i, C) ? 1 : 0;
  if (grad) *grad = Tensor<T>(logits.shape());
  if (out.count == 0) {
    out.empty = true;
    return out;
  }
  const T n = static_cast<T>(out.count);
  T sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!detail::Visible(mask, i, C)) continue;
    const T z = logits[i], t = target[i];
    sum += model::Softplus(z) - t * z;
    if (grad) (*grad)[i] = (model::Sigmoid(z) - t) / n;
  }
  out.value = static_cast<double>(sum / n);
  return out;
}

/// Average of the frame-level and clip-level mean squared errors;
/// symmetric, unmasked.
template <typename T>
double ConsistencyLoss(const Tensor<T>& strong_a, const Tensor<T>& weak_a, const Tensor<T>& strong_b,
                       const Tensor<T>& weak_b) {
  if (strong_a.shape() != strong_b.shape() || weak_a.shape() != weak_b.shape()) {
    Fail(ErrorKind::kShape, "consistency: output shapes differ");
  }
  double s = 0, w = 0;
  for (std::size_t i = 0; i < strong_a.size(); ++i) {
    const double d = static_cast<double>(strong_a[i]) - static_cast<double>(strong_b[i]);
    s += d * d;
  }
  for (std::size_t i = 0; i < weak_a.size(); ++i) {
    const double d = static_cast<double>(weak_a[i]) - static_cast<double>(weak_b[i]);
    w += d * d;
  }
  return 0.5 * (s / static_cast<double>(strong_a.size()) + w / static_cast<double>(weak_a.size()));
}

enum class LabelKind : std::uint8_t { kNone = 0, kStrong = 1, kWeak = 2, kSoft = 3 };

/// Targets for one batch. Only the rows whose kind matches are read.
template <typename T>
struct BatchTargets {
  std::vector<LabelKind> kind;  // [B]
  Tensor<T> strong;             // [B, frames, C]
  Tensor<T> weak;               // [B, C]
  Tensor<T> soft;               // [B, segments, C]
  Tensor<T> mask;               // [B, C]

  std::size_t size() const { return kind.size(); }
};

struct LossWeights {
  double strong = 1.0;
  double weak = 1.0;
  double soft = 1.0;
};

struct LossBreakdown {
  double strong_bce = 0;
  double weak_bce = 0;
  double soft_mpa_bce = 0;
  double consistency = 0;
  double aux_strong_bce = 0;
  double aux_weak_bce = 0;
  double aux_soft_mpa_bce = 0;
  double consistency_weight = 0;
  double aux_weight = 0;
  double total = 0;

  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

template <typename T>
struct LossResult {
  LossBreakdown loss;
  model::HeadGrad<T> main;
  model::HeadGrad<T> aux;
};

namespace detail {

struct HeadLosses {
  double strong = 0, weak = 0, soft = 0;
};

/// Supervised terms for one head; gradients are scaled by scale and
/// accumulated into g.
template <typename T>
HeadLosses Supervised(const model::HeadOutput<T>& head, const BatchTargets<T>& tg, const LossWeights& w,
                      double scale, model::HeadGrad<T>& g) {
  const std::size_t B = tg.size(), F = head.strong.dim(1), C = head.strong.dim(2);
  const std::size_t window = datasets::kFramesPerSegment;
  std::size_t n_strong = 0, n_weak = 0, n_soft = 0;
  for (std::size_t b = 0; b < B; ++b) {
    std::size_t visible = 0;
    for (std::size_t c = 0; c < C; ++c) visible += tg.mask.at(b, c) > T(0) ? 1 : 0;
    switch (tg.kind[b]) {
      case LabelKind::kStrong: n_strong += visible * F; break;
      case LabelKind::kWeak: n_weak += visible; break;
      case LabelKind::kSoft: n_soft += visible * (F / window); break;
      case LabelKind::kNone: break;
    }
  }
  HeadLosses out;
  for (std::size_t b = 0; b < B; ++b) {
    const LabelKind kind = tg.kind[b];
    for (std::size_t c = 0; c < C; ++c) {
      if (!(tg.mask.at(b, c) > T(0))) continue;
      if (kind == LabelKind::kStrong) {
        const T coef = static_cast<T>(scale * w.strong / static_cast<double>(n_strong));
        for (std::size_t f = 0; f < F; ++f) {
          const T z = head.strong_logits.at(b, f, c), t = tg.strong.at(b, f, c);
          out.strong += static_cast<double>(model::Softplus(z) - t * z);
          g.d_strong_logits.at(b, f, c) += coef * (model::Sigmoid(z) - t);
        }
      } else if (kind == LabelKind::kWeak) {
        const double raw = head.weak.at(b, c);
        const double p = std::clamp(raw, kProbEps, 1.0 - kProbEps);
        const double t = tg.weak.at(b, c);
        out.weak -= t * std::log(p) + (1 - t) * std::log(1 - p);
        if (raw == p) {
          g.d_weak.at(b, c) += static_cast<T>(scale * w.weak * (p - t) / (p * (1 - p)) / static_cast<double>(n_weak));
        }
      } else if (kind == LabelKind::kSoft) {
        // max of sigmoids is the sigmoid of the max logit
        const T coef = static_cast<T>(scale * w.soft / static_cast<double>(n_soft));
        for (std::size_t s = 0; s < F / window; ++s) {
          std::size_t arg = s * window;
          for (std::size_t f = arg + 1; f < (s + 1) * window; ++f) {
            if (head.strong_logits.at(b, f, c) > head.strong_logits.at(b, arg, c)) arg = f;
          }
          const T z = head.strong_logits.at(b, arg, c), t = tg.soft.at(b, s, c);
          out.soft += static_cast<double>(model::Softplus(z) - t * z);
          g.d_strong_logits.at(b, arg, c) += coef * (model::Sigmoid(z) - t);
        }
      }
    }
  }
  if (n_strong) out.strong /= static_cast<double>(n_strong);
  if (n_weak) out.weak /= static_cast<double>(n_weak);
  if (n_soft) out.soft /= static_cast<double>(n_soft);
  return out;
}

}  // namespace detail

/// All loss terms and the gradients they send into the student heads.
/// teacher may be null (no consistency term).
template <typename T>
LossResult<T> ComputeLosses(const model::ForwardOutput<T>& student, const model::HeadOutput<T>* teacher,
                            const BatchTargets<T>& targets, const LossWeights& weights,
                            double consistency_weight, double aux_weight) {
  const auto& main = student.main;
  const std::size_t B = main.strong.dim(0), F = main.strong.dim(1), C = main.strong.dim(2);
  if (targets.size() != B) Fail(ErrorKind::kShape, "targets for {} examples, batch has {}", targets.size(), B);
  LossResult<T> r;
  r.main = {Tensor<T>({B, F, C}), Tensor<T>({B, C})};
  r.aux = {Tensor<T>({B, F, C}), Tensor<T>({B, C})};
  const auto m = detail::Supervised(main, targets, weights, 1.0, r.main);
  r.loss.strong_bce = m.strong;
  r.loss.weak_bce = m.weak;
  r.loss.soft_mpa_bce = m.soft;
  if (student.aux) {
    const auto a = detail::Supervised(*student.aux, targets, weights, aux_weight, r.aux);
    r.loss.aux_strong_bce = a.strong;
    r.loss.aux_weak_bce = a.weak;
    r.loss.aux_soft_mpa_bce = a.soft;
  }
  if (teacher) {
    r.loss.consistency = ConsistencyLoss(main.strong, main.weak, teacher->strong, teacher->weak);
    if (consistency_weight != 0.0) {
      const T cs = static_cast<T>(consistency_weight / static_cast<double>(main.strong.size()));
      const T cw = static_cast<T>(consistency_weight / static_cast<double>(main.weak.size()));
      for (std::size_t i = 0; i < main.strong.size(); ++i) {
        const T p = main.strong[i];
        r.main.d_strong_logits[i] += cs * (p - teacher->strong[i]) * p * (T(1) - p);
      }
      for (std::size_t i = 0; i < main.weak.size(); ++i) r.main.d_weak[i] += cw * (main.weak[i] - teacher->weak[i]);
    }
  }
  r.loss.consistency_weight = consistency_weight;
  r.loss.aux_weight = aux_weight;
  r.loss.total = weights.strong * r.loss.strong_bce + weights.weak * r.loss.weak_bce +
                 weights.soft * r.loss.soft_mpa_bce + consistency_weight * r.loss.consistency +
                 aux_weight * (weights.strong * r.loss.aux_strong_bce + weights.weak * r.loss.aux_weak_bce +
                               weights.soft * r.loss.aux_soft_mpa_bce);
  return r;
}

/// Name of the first non-finite term, or empty.
inline std::string NonFiniteTerm(const LossBreakdown& l) {
  const std::pair<const char*, double> terms[] = {
      {"strong_bce", l.strong_bce},         {"weak_bce", l.weak_bce},
      {"soft_mpa_bce", l.soft_mpa_bce},     {"consistency", l.consistency},
      {"aux_strong_bce", l.aux_strong_bce}, {"aux_weak_bce", l.aux_weak_bce},
      {"aux_soft_mpa_bce", l.aux_soft_mpa_bce}, {"total", l.total}};
  for (const auto& [name, v] : terms) {
    if (!std::isfinite(v)) return name;
  }
  return {};
}

}  // namespace sedkit::training
