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

#include <cmath>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/featurize/features.hpp"

namespace sedkit::featurize {

inline constexpr double kStdFloor = 1e-8;

struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;
  std::uint64_t n_clips_observed = 0;

  std::size_t channels() const { return mean.size(); }
};

/// Streaming per-channel moments. Each tensor is reduced on its own with a
/// two-pass centered sum, then merged with the pairwise update of Chan et
/// al., so the result does not depend on the order tensors arrive in beyond
/// rounding.
class NormAccumulator {
 public:
  struct Moments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
  };

  static std::vector<Moments> TensorMoments(const FeatureTensor& t) {
    const std::size_t channels = t.channels();
    const std::size_t per_channel = t.frames() * t.bins();
    std::vector<Moments> out(channels);
    for (std::size_t c = 0; c < channels; ++c) {
      const float* p = t.data.data() + c * per_channel;
      double sum = 0.0;
      for (std::size_t i = 0; i < per_channel; ++i) sum += p[i];
      const double mean = sum / static_cast<double>(per_channel);
      double m2 = 0.0, comp = 0.0;
      for (std::size_t i = 0; i < per_channel; ++i) {
        const double d = p[i] - mean;
        m2 += d * d;
        comp += d;
      }
      // Compensates the rounding of the first-pass mean.
      m2 -= comp * comp / static_cast<double>(per_channel);
      out[c] = {static_cast<double>(per_channel), mean, std::max(0.0, m2)};
    }
    return out;
  }

  void Add(const FeatureTensor& t) { AddMoments(TensorMoments(t)); }

  void AddMoments(const std::vector<Moments>& m) {
    if (moments_.empty()) moments_.resize(m.size());
    if (m.size() != moments_.size()) {
      Fail(ErrorKind::kShape, "channel count changed from {} to {}",
           moments_.size(), m.size());
    }
    for (std::size_t c = 0; c < m.size(); ++c) {
      auto& a = moments_[c];
      const auto& b = m[c];
      const double n = a.count + b.count;
      const double delta = b.mean - a.mean;
      a.mean += delta * b.count / n;
      a.m2 += b.m2 + delta * delta * a.count * b.count / n;
      a.count = n;
    }
    ++clips_;
  }

  NormStats Finish() const {
    if (clips_ == 0) Fail(ErrorKind::kParameter, "no tensors to compute statistics from");
    NormStats s;
    s.n_clips_observed = clips_;
    for (const auto& m : moments_) {
      s.mean.push_back(m.mean);
      s.std.push_back(std::max(std::sqrt(m.m2 / m.count), kStdFloor));
    }
    return s;
  }

 private:
  std::vector<Moments> moments_;
  std::uint64_t clips_ = 0;
};

inline NormStats ComputeNormStats(std::span<const FeatureTensor> tensors) {
  NormAccumulator acc;
  for (const auto& t : tensors) acc.Add(t);
  return acc.Finish();
}

inline void CheckStats(const FeatureTensor& t, const NormStats& stats) {
  if (stats.channels() != t.channels()) {
    Fail(ErrorKind::kShape, "stats have {} channels, tensor has {}",
         stats.channels(), t.channels());
  }
}

inline FeatureTensor Normalize(FeatureTensor t, const NormStats& stats) {
  if (t.normalized) Fail(ErrorKind::kState, "tensor is already normalized");
  CheckStats(t, stats);
  const std::size_t per_channel = t.frames() * t.bins();
  for (std::size_t c = 0; c < t.channels(); ++c) {
    float* p = t.data.data() + c * per_channel;
    const double mean = stats.mean[c], sd = stats.std[c];
    for (std::size_t i = 0; i < per_channel; ++i) {
      p[i] = static_cast<float>((p[i] - mean) / sd);
    }
  }
  t.normalized = true;
  return t;
}

inline FeatureTensor Denormalize(FeatureTensor t, const NormStats& stats) {
  if (!t.normalized) Fail(ErrorKind::kState, "tensor is not normalized");
  CheckStats(t, stats);
  const std::size_t per_channel = t.frames() * t.bins();
  for (std::size_t c = 0; c < t.channels(); ++c) {
    float* p = t.data.data() + c * per_channel;
    const double mean = stats.mean[c], sd = stats.std[c];
    for (std::size_t i = 0; i < per_channel; ++i) {
      p[i] = static_cast<float>(p[i] * sd + mean);
    }
  }
  t.normalized = false;
  return t;
}

}  // namespace sedkit::featurize
