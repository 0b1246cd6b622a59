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

#include <string>
#include <utility>
#include <vector>

#include "sedkit/datasets/labels.hpp"
#include "sedkit/featurize/features.hpp"

namespace sedkit::datasets {

struct CropSpec {
  double window_s = 10.0;
  double hop_s = 1.0;
};

/// Number of window starts at 0, hop, 2*hop, ... that fit in the clip; at
/// least one (the degenerate short-clip crop).
inline std::size_t CropCount(double duration_s, const CropSpec& spec = {}) {
  if (duration_s < spec.window_s) return 1;
  return static_cast<std::size_t>(std::floor((duration_s - spec.window_s) / spec.hop_s + 1e-9)) + 1;
}

/// Crop id for long-clip crops; crop k starts at k * hop seconds.
inline std::string CropId(const std::string& clip_id, std::size_t k) {
  return clip_id + "@" + std::to_string(k);
}

/// Rows [first, first + count) of a soft matrix, zero-padded past its end.
inline SoftLabelSet SliceSoft(const SoftLabelSet& labels, std::size_t first,
                              std::size_t count, std::size_t n_classes) {
  SoftLabelSet out;
  out.segments = Tensor<float>({count, n_classes});
  for (std::size_t s = 0; s < count; ++s) {
    if (first + s >= labels.n_segments()) break;
    for (std::size_t c = 0; c < n_classes; ++c) {
      out.segments.at(s, c) = labels.segments.at(first + s, c);
    }
  }
  return out;
}

/// Sliding crops of a long soft-labelled clip. Each crop carries the soft
/// rows aligned with its window. A clip shorter than the window yields one
/// zero-padded crop.
inline std::vector<std::pair<featurize::AudioClip, SoftLabelSet>> CropClip(
    const featurize::AudioClip& clip, const SoftLabelSet& labels, std::size_t n_classes,
    const CropSpec& spec = {}) {
  const auto rate = static_cast<std::size_t>(clip.sample_rate);
  const auto win = static_cast<std::size_t>(std::llround(spec.window_s * rate));
  const auto hop = static_cast<std::size_t>(std::llround(spec.hop_s * rate));
  const auto rows = static_cast<std::size_t>(std::llround(spec.window_s));
  const auto hop_rows = static_cast<std::size_t>(std::llround(spec.hop_s));
  const std::size_t n = CropCount(clip.duration_s(), spec);
  std::vector<std::pair<featurize::AudioClip, SoftLabelSet>> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    featurize::AudioClip crop;
    crop.sample_rate = clip.sample_rate;
    crop.source_path = clip.source_path;
    const std::size_t start = k * hop;
    const std::size_t end = std::min(clip.samples.size(), start + win);
    crop.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(start),
                        clip.samples.begin() + static_cast<std::ptrdiff_t>(end));
    crop.samples.resize(win, 0.0f);
    out.emplace_back(std::move(crop), SliceSoft(labels, k * hop_rows, rows, n_classes));
  }
  return out;
}

}  // namespace sedkit::datasets
