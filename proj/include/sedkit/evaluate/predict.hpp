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
#include <string>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/tensor.hpp"
#include "sedkit/evaluate/scores.hpp"
#include "sedkit/model/crnn.hpp"
#include "sedkit/model/parameters.hpp"

namespace sedkit::evaluate {

inline constexpr std::size_t kPredictBatch = 8;

/// Eval-mode frame posteriors of the main decoder, one record per clip.
/// features: normalized [channels, frames, bins]; embeddings empty or [250, E].
inline std::vector<ScoreRecord> PredictScores(const model::ModelConfig& mc, const model::ParameterSet<float>& params,
                                              const std::vector<std::string>& clip_ids,
                                              const std::vector<Tensor<float>>& features,
                                              const std::vector<Tensor<float>>& embeddings) {
  if (clip_ids.size() != features.size() || (!embeddings.empty() && embeddings.size() != features.size())) {
    Fail(ErrorKind::kParameter, "predict: clip, feature and embedding counts differ");
  }
  std::vector<ScoreRecord> out;
  out.reserve(clip_ids.size());
  for (std::size_t lo = 0; lo < features.size(); lo += kPredictBatch) {
    const std::size_t hi = std::min(features.size(), lo + kPredictBatch);
    const auto& shape = features[lo].shape();
    std::vector<std::size_t> xs = {hi - lo};
    xs.insert(xs.end(), shape.begin(), shape.end());
    Tensor<float> x(xs);
    const bool with_emb = mc.embedding_dim > 0;
    Tensor<float> e;
    for (std::size_t i = lo; i < hi; ++i) {
      if (features[i].shape() != shape) Fail(ErrorKind::kShape, "clip {}: features {} differ from {}", clip_ids[i], ShapeString(features[i].shape()), ShapeString(shape));
      std::copy(features[i].values().begin(), features[i].values().end(), x.values().begin() + static_cast<long>((i - lo) * features[i].size()));
    }
    if (with_emb) {
      if (embeddings.empty()) Fail(ErrorKind::kParameter, "model needs embeddings");
      const auto& es = embeddings[lo].shape();
      e = Tensor<float>({hi - lo, es.at(0), es.at(1)});
      for (std::size_t i = lo; i < hi; ++i) {
        if (embeddings[i].shape() != es) Fail(ErrorKind::kShape, "clip {}: embeddings {} differ from {}", clip_ids[i], ShapeString(embeddings[i].shape()), ShapeString(es));
        std::copy(embeddings[i].values().begin(), embeddings[i].values().end(), e.values().begin() + static_cast<long>((i - lo) * embeddings[i].size()));
      }
    }
    const auto fwd = model::ModelForward(mc, params, x, with_emb ? &e : nullptr, {model::Mode::kEval, 0, false});
    const auto& s = fwd.main.strong;  // [b, T, C]
    const std::size_t T = s.dim(1), C = s.dim(2);
    for (std::size_t i = lo; i < hi; ++i) {
      ScoreRecord r{clip_ids[i], Tensor<float>({T, C})};
      std::copy(s.values().begin() + static_cast<long>((i - lo) * T * C), s.values().begin() + static_cast<long>((i - lo + 1) * T * C), r.scores.values().begin());
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace sedkit::evaluate
