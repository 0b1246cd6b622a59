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
#include <map>
#include <string>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/random.hpp"
#include "sedkit/common/tensor.hpp"
#include "sedkit/datasets/manifest.hpp"
#include "sedkit/training/losses.hpp"

namespace sedkit::training {

/// One clip ready for training. Label tensors are present only for the
/// matching source; mask marks the classes that source annotates.
struct TrainingExample {
  std::string clip_id;
  datasets::Source source = datasets::Source::kUnlabeled;
  Tensor<float> features;    // [channels, frames, bins], normalized
  Tensor<float> strong;      // [250, C]
  Tensor<float> weak;        // [C]
  Tensor<float> soft;        // [10, C]
  Tensor<float> mask;        // [C]
  Tensor<float> embeddings;  // [250, E] or empty
};

inline LabelKind KindOf(datasets::Source s) {
  switch (s) {
    case datasets::Source::kSynthStrong:
    case datasets::Source::kRealStrong: return LabelKind::kStrong;
    case datasets::Source::kWeak: return LabelKind::kWeak;
    case datasets::Source::kMaestroSoft: return LabelKind::kSoft;
    default: return LabelKind::kNone;
  }
}

struct AugmentConfig {
  bool time_shift = true;
  int max_time_shift = 90;  // input frames
  bool freq_shift = true;
  int max_freq_shift = 2;  // bins
  bool time_mask = true;
  int max_time_mask = 100;  // input frames
  bool mixup = true;
  double mixup_alpha = 0.2;
  double mixup_prob = 0.5;  // per source group and batch
  bool filter = true;
  int filter_min_knots = 2;
  int filter_max_knots = 5;
  double filter_db = 6.0;
  std::size_t logmel_channels = 2;  // leading channels that hold log-mel energies
  /// Per log-mel channel 1/std of the normalization, so a gain in dB
  /// becomes the right offset on normalized features.
  std::vector<double> logmel_scale = {1.0, 1.0};

  static AugmentConfig Disabled() {
    AugmentConfig c;
    c.time_shift = c.freq_shift = c.time_mask = c.mixup = c.filter = false;
    return c;
  }
};

/// Circular roll along rows of a [rows, cols] grid.
inline void RollRows(Tensor<float>& grid, long shift) {
  const long rows = static_cast<long>(grid.dim(0));
  if (rows == 0) return;
  const long s = ((shift % rows) + rows) % rows;
  if (s == 0) return;
  const std::size_t cols = grid.size() / grid.dim(0);
  std::rotate(grid.storage().begin(), grid.storage().end() - s * static_cast<long>(cols), grid.storage().end());
}

/// Label grids move by the shift rounded to output frames (4 input frames).
inline long OutputShift(long input_shift) { return std::lround(static_cast<double>(input_shift) / 4.0); }

/// Rolls features [ch, frames, bins] circularly by shift frames.
inline void TimeShift(Tensor<float>& features, long shift) {
  const std::size_t ch = features.dim(0), frames = features.dim(1), bins = features.dim(2);
  const long s = ((shift % static_cast<long>(frames)) + static_cast<long>(frames)) % static_cast<long>(frames);
  if (s == 0) return;
  for (std::size_t c = 0; c < ch; ++c) {
    auto begin = features.storage().begin() + static_cast<long>(c * frames * bins);
    auto end = begin + static_cast<long>(frames * bins);
    std::rotate(begin, end - s * static_cast<long>(bins), end);
  }
}

/// Moves log-mel channels up (shift > 0) or down by whole bins; vacated
/// bins become 0.
inline void FreqShift(Tensor<float>& features, long shift, std::size_t channels) {
  const std::size_t frames = features.dim(1), bins = features.dim(2);
  std::vector<float> row(bins);
  for (std::size_t c = 0; c < std::min(channels, features.dim(0)); ++c) {
    for (std::size_t t = 0; t < frames; ++t) {
      float* p = &features.at(c, t, 0);
      for (std::size_t f = 0; f < bins; ++f) {
        const long src = static_cast<long>(f) - shift;
        row[f] = src >= 0 && src < static_cast<long>(bins) ? p[src] : 0.0f;
      }
      std::copy(row.begin(), row.end(), p);
    }
  }
}

inline void TimeMask(Tensor<float>& features, std::size_t start, std::size_t length) {
  const std::size_t frames = features.dim(1), bins = features.dim(2);
  const std::size_t end = std::min(frames, start + length);
  for (std::size_t c = 0; c < features.dim(0); ++c)
    for (std::size_t t = start; t < end; ++t) std::fill_n(&features.at(c, t, 0), bins, 0.0f);
}

/// Piecewise-linear gain curve in dB over bins: knots evenly spaced from
/// the first to the last bin with uniform gains in [-db, db].
inline std::vector<double> FilterGains(Rng& rng, std::size_t bins, int min_knots, int max_knots, double db) {
  const auto knots = static_cast<std::size_t>(UniformInt(rng, min_knots, max_knots));
  std::vector<double> gain(knots);
  for (auto& g : gain) g = UniformRange(rng, -db, db);
  std::vector<double> out(bins);
  for (std::size_t f = 0; f < bins; ++f) {
    const double pos = bins > 1 ? static_cast<double>(f) * static_cast<double>(knots - 1) / static_cast<double>(bins - 1) : 0.0;
    const auto k = std::min(static_cast<std::size_t>(pos), knots - 2);
    const double w = pos - static_cast<double>(k);
    out[f] = (1 - w) * gain[k] + w * gain[k + 1];
  }
  return out;
}

/// Adds a per-bin gain to the log-mel channels (natural-log energies).
inline void FilterAugment(Tensor<float>& features, const std::vector<double>& gains_db, const AugmentConfig& cfg) {
  const std::size_t frames = features.dim(1), bins = features.dim(2);
  const double to_nat = std::log(10.0) / 10.0;
  for (std::size_t c = 0; c < std::min(cfg.logmel_channels, features.dim(0)); ++c) {
    const double scale = c < cfg.logmel_scale.size() ? cfg.logmel_scale[c] : 1.0;
    for (std::size_t t = 0; t < frames; ++t) {
      float* p = &features.at(c, t, 0);
      for (std::size_t f = 0; f < bins; ++f) p[f] += static_cast<float>(gains_db[f] * to_nat * scale);
    }
  }
}

/// a = lambda * a + (1 - lambda) * b, elementwise.
inline void MixInto(Tensor<float>& a, const Tensor<float>& b, double lambda) {
  if (a.empty()) return;
  if (a.shape() != b.shape()) Fail(ErrorKind::kShape, "mixup: shapes differ");
  const auto l = static_cast<float>(lambda), m = static_cast<float>(1.0 - lambda);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = l * a[i] + m * b[i];
}

inline TrainingExample MixPair(const TrainingExample& a, const TrainingExample& b, double lambda) {
  TrainingExample out = a;
  MixInto(out.features, b.features, lambda);
  MixInto(out.strong, b.strong, lambda);
  MixInto(out.weak, b.weak, lambda);
  MixInto(out.soft, b.soft, lambda);
  MixInto(out.embeddings, b.embeddings, lambda);
  return out;
}

/// Inputs of one training step: two views of the same clips, shared
/// label-level augmentation (mixup, time shift) and independently drawn
/// label-preserving augmentation (frequency shift, time mask, filter).
template <typename T>
struct StepBatch {
  Tensor<T> student;     // [B, ch, frames, bins]
  Tensor<T> teacher;
  Tensor<T> embeddings;  // [B, 250, E] or empty
  BatchTargets<T> targets;
};

namespace detail {

inline void LabelPreserving(Tensor<float>& x, const AugmentConfig& cfg, Rng& rng) {
  if (cfg.freq_shift && cfg.max_freq_shift > 0) {
    FreqShift(x, UniformInt(rng, -cfg.max_freq_shift, cfg.max_freq_shift), cfg.logmel_channels);
  }
  if (cfg.time_mask && cfg.max_time_mask > 0) {
    const auto len = static_cast<std::size_t>(
        UniformInt(rng, 0, std::min<long>(cfg.max_time_mask, static_cast<long>(x.dim(1)))));
    const auto start = static_cast<std::size_t>(UniformInt(rng, 0, static_cast<long>(x.dim(1) - len)));
    TimeMask(x, start, len);
  }
  if (cfg.filter) {
    FilterAugment(x, FilterGains(rng, x.dim(2), cfg.filter_min_knots, cfg.filter_max_knots, cfg.filter_db), cfg);
  }
}

template <typename T>
void Place(Tensor<T>& dst, std::size_t b, const Tensor<float>& src) {
  const std::size_t n = src.size();
  for (std::size_t i = 0; i < n; ++i) dst[b * n + i] = static_cast<T>(src[i]);
}

}  // namespace detail

template <typename T = float>
StepBatch<T> BuildStepBatch(const std::vector<const TrainingExample*>& batch, const AugmentConfig& cfg,
                            std::size_t n_classes, std::uint64_t seed, std::uint64_t step) {
  if (batch.empty()) Fail(ErrorKind::kParameter, "empty batch");
  const std::size_t B = batch.size();
  const auto& shape = batch[0]->features.shape();
  std::vector<TrainingExample> ex;
  ex.reserve(B);
  for (const auto* e : batch) {
    if (e->features.shape() != shape) Fail(ErrorKind::kShape, "batch features differ in shape ({})", e->clip_id);
    ex.push_back(*e);
  }
  Rng shared = DeriveRng(seed, {0xA06u, step, 0});
  if (cfg.mixup) {
    std::map<datasets::Source, std::vector<std::size_t>> groups;
    for (std::size_t b = 0; b < B; ++b) groups[ex[b].source].push_back(b);
    const std::vector<TrainingExample> original = ex;
    for (auto& [source, idx] : groups) {
      if (idx.size() < 2 || Uniform01(shared) >= cfg.mixup_prob) continue;
      std::vector<std::size_t> perm = idx;
      Shuffle(perm.begin(), perm.end(), shared);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const double lambda = SampleBeta(shared, cfg.mixup_alpha, cfg.mixup_alpha);
        ex[idx[i]] = MixPair(original[idx[i]], original[perm[i]], lambda);
      }
    }
  }
  if (cfg.time_shift && cfg.max_time_shift > 0) {
    for (auto& e : ex) {
      const long shift = UniformInt(shared, -cfg.max_time_shift, cfg.max_time_shift);
      if (e.source == datasets::Source::kMaestroSoft) continue;
      TimeShift(e.features, shift);
      if (!e.strong.empty()) RollRows(e.strong, OutputShift(shift));
      if (!e.embeddings.empty()) RollRows(e.embeddings, OutputShift(shift));
    }
  }

  StepBatch<T> out;
  std::vector<std::size_t> xshape = {B};
  xshape.insert(xshape.end(), shape.begin(), shape.end());
  out.student = Tensor<T>(xshape);
  out.teacher = Tensor<T>(xshape);
  const std::size_t frames = datasets::kOutputFrames;
  const std::size_t segments = frames / datasets::kFramesPerSegment;
  auto& tg = out.targets;
  tg.kind.resize(B);
  tg.strong = Tensor<T>({B, frames, n_classes});
  tg.weak = Tensor<T>({B, n_classes});
  tg.soft = Tensor<T>({B, segments, n_classes});
  tg.mask = Tensor<T>({B, n_classes});
  const bool with_emb = !ex[0].embeddings.empty();
  if (with_emb) out.embeddings = Tensor<T>({B, ex[0].embeddings.dim(0), ex[0].embeddings.dim(1)});
  for (std::size_t b = 0; b < B; ++b) {
    auto& e = ex[b];
    tg.kind[b] = KindOf(e.source);
    if (e.mask.size() != n_classes) Fail(ErrorKind::kShape, "{}: class mask has {} entries", e.clip_id, e.mask.size());
    detail::Place(tg.mask, b, e.mask);
    switch (tg.kind[b]) {
      case LabelKind::kStrong: RequireShape(e.strong, {frames, n_classes}, "strong grid"); detail::Place(tg.strong, b, e.strong); break;
      case LabelKind::kWeak: RequireShape(e.weak, {n_classes}, "weak vector"); detail::Place(tg.weak, b, e.weak); break;
      case LabelKind::kSoft: RequireShape(e.soft, {segments, n_classes}, "soft grid"); detail::Place(tg.soft, b, e.soft); break;
      case LabelKind::kNone: break;
    }
    if (with_emb) detail::Place(out.embeddings, b, e.embeddings);
    Tensor<float> s = e.features, t = std::move(e.features);
    Rng rs = DeriveRng(seed, {0xA06u, step, 1, b});
    Rng rt = DeriveRng(seed, {0xA06u, step, 2, b});
    detail::LabelPreserving(s, cfg, rs);
    detail::LabelPreserving(t, cfg, rt);
    detail::Place(out.student, b, s);
    detail::Place(out.teacher, b, t);
  }
  return out;
}

}  // namespace sedkit::training
