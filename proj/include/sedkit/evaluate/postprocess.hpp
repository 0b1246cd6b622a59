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
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/tensor.hpp"
#include "sedkit/datasets/labels.hpp"

namespace sedkit::evaluate {

inline constexpr std::size_t kDefaultMedianWindow = 7;

/// Per-class running median over frames with edge replication.
/// scores: [frames, C].
inline Tensor<float> MedianFilter(const Tensor<float>& scores, std::size_t window) {
  if (scores.rank() != 2) Fail(ErrorKind::kShape, "median filter expects [frames, classes]");
  if (window == 0 || window % 2 == 0) Fail(ErrorKind::kParameter, "median window must be odd, got {}", window);
  const std::size_t frames = scores.dim(0), C = scores.dim(1);
  if (window > frames) Fail(ErrorKind::kParameter, "median window {} exceeds {} frames", window, frames);
  if (window == 1) return scores;
  const long half = static_cast<long>(window / 2);
  Tensor<float> out(scores.shape());
  std::vector<float> buf(window);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < frames; ++t) {
      for (long k = -half; k <= half; ++k) {
        const long src = std::clamp(static_cast<long>(t) + k, 0L, static_cast<long>(frames) - 1);
        buf[static_cast<std::size_t>(k + half)] = scores.at(static_cast<std::size_t>(src), c);
      }
      std::nth_element(buf.begin(), buf.begin() + half, buf.end());
      out.at(t, c) = buf[static_cast<std::size_t>(half)];
    }
  }
  return out;
}

struct DecodedEvent {
  std::size_t class_id = 0;
  double onset = 0;
  double offset = 0;
  float confidence = 0;  // peak score inside the run

  friend bool operator==(const DecodedEvent&, const DecodedEvent&) = default;
};

/// Maximal runs of frames with score >= threshold, per class, ordered by
/// class then onset.
inline std::vector<DecodedEvent> DecodeEvents(const Tensor<float>& scores, double threshold,
                                              double frame_s = datasets::kOutputFrameSeconds) {
  if (scores.rank() != 2) Fail(ErrorKind::kShape, "decode expects [frames, classes]");
  const std::size_t frames = scores.dim(0), C = scores.dim(1);
  std::vector<DecodedEvent> events;
  for (std::size_t c = 0; c < C; ++c) {
    std::size_t t = 0;
    while (t < frames) {
      if (!(scores.at(t, c) >= threshold)) {
        ++t;
        continue;
      }
      const std::size_t start = t;
      float peak = scores.at(t, c);
      while (t < frames && scores.at(t, c) >= threshold) peak = std::max(peak, scores.at(t++, c));
      events.push_back({c, static_cast<double>(start) * frame_s, static_cast<double>(t) * frame_s, peak});
    }
  }
  return events;
}

}  // namespace sedkit::evaluate
