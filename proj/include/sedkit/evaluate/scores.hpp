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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sedkit/common/binary_io.hpp"
#include "sedkit/common/error.hpp"
#include "sedkit/common/tensor.hpp"

// Score files: concatenated "SEDS" records, one per clip.

namespace sedkit::evaluate {

struct ScoreRecord {
  std::string clip_id;
  Tensor<float> scores;  // [frames, C]

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

inline void AppendScoreRecord(ByteWriter& w, const ScoreRecord& r) {
  if (r.scores.rank() != 2) Fail(ErrorKind::kShape, "score record {} must be [frames, classes]", r.clip_id);
  if (r.clip_id.size() > 0xFFFF) Fail(ErrorKind::kParameter, "clip id too long");
  w.PutTag("SEDS");
  w.PutShortString(r.clip_id);
  w.PutU32(static_cast<std::uint32_t>(r.scores.dim(0)));
  w.PutU32(static_cast<std::uint32_t>(r.scores.dim(1)));
  w.PutF32s(r.scores.values());
}

inline std::vector<std::uint8_t> EncodeScores(const std::vector<ScoreRecord>& records) {
  ByteWriter w;
  for (const auto& r : records) AppendScoreRecord(w, r);
  return std::move(w.bytes());
}

inline std::vector<ScoreRecord> DecodeScores(std::span<const std::uint8_t> bytes, const std::string& source) {
  ByteReader r(bytes, source);
  std::vector<ScoreRecord> out;
  while (!r.AtEnd()) {
    r.ExpectTag("SEDS");
    ScoreRecord rec;
    rec.clip_id = r.GetShortString();
    const std::uint64_t frames = r.GetU32();
    const std::uint64_t classes = r.GetU32();
    if (frames == 0 || classes == 0) r.Error("zero dimension");
    r.RequireElements(frames * classes, sizeof(float));
    rec.scores = Tensor<float>({frames, classes});
    r.GetF32s(rec.scores.values());
    for (float v : rec.scores.values()) {
      if (!(v >= 0.0f && v <= 1.0f)) r.Error(fmt::format("clip {} has a score outside [0, 1]", rec.clip_id));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline void WriteScores(const std::filesystem::path& path, const std::vector<ScoreRecord>& records) {
  WriteFileBytes(path, EncodeScores(records));
}

inline std::vector<ScoreRecord> ReadScores(const std::filesystem::path& path) {
  return DecodeScores(ReadFileBytes(path), path.string());
}

inline std::map<std::string, Tensor<float>> ScoreMap(const std::vector<ScoreRecord>& records) {
  std::map<std::string, Tensor<float>> out;
  for (const auto& r : records) {
    if (!out.emplace(r.clip_id, r.scores).second) Fail(ErrorKind::kMetric, "duplicate scores for clip {}", r.clip_id);
  }
  return out;
}

/// Elementwise mean over models. Every model must list the same clips with
/// the same shapes; the output keeps the first model's clip order.
inline std::vector<ScoreRecord> EnsembleAverage(const std::vector<std::vector<ScoreRecord>>& models) {
  if (models.empty()) Fail(ErrorKind::kParameter, "ensemble needs at least one model");
  const auto& first = models.front();
  std::vector<std::map<std::string, const ScoreRecord*>> index(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (const auto& r : models[m]) index[m][r.clip_id] = &r;
    if (models[m].size() != first.size() || index[m].size() != first.size()) {
      Fail(ErrorKind::kShape, "ensemble: model {} has {} clips, model 0 has {}", m, models[m].size(), first.size());
    }
  }
  std::vector<ScoreRecord> out;
  for (const auto& r : first) {
    std::vector<double> acc(r.scores.size(), 0.0);
    for (std::size_t m = 0; m < models.size(); ++m) {
      auto it = index[m].find(r.clip_id);
      if (it == index[m].end()) Fail(ErrorKind::kShape, "ensemble: clip {} missing from model {}", r.clip_id, m);
      const auto& s = it->second->scores;
      if (s.shape() != r.scores.shape()) {
        Fail(ErrorKind::kShape, "ensemble: clip {} has shape {} in model {}, {} in model 0", r.clip_id,
             ShapeString(s.shape()), m, ShapeString(r.scores.shape()));
      }
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s[i];
    }
    ScoreRecord avg{r.clip_id, Tensor<float>(r.scores.shape())};
    for (std::size_t i = 0; i < acc.size(); ++i) avg.scores[i] = static_cast<float>(acc[i] / static_cast<double>(models.size()));
    out.push_back(std::move(avg));
  }
  return out;
}

struct CheckpointReport {
  std::string path;
  std::uint32_t epoch = 0;
  double psds = 0;
  double mpauc = 0;

  double key() const { return psds + mpauc; }
};

struct Ranking {
  std::vector<CheckpointReport> top;
  bool truncated_request = false;  // k exceeded the available reports
};

/// Descending by psds + mpauc; ties go to the later epoch.
inline Ranking RankCheckpoints(std::vector<CheckpointReport> reports, std::size_t k) {
  if (reports.empty()) Fail(ErrorKind::kParameter, "no checkpoint reports to rank");
  std::stable_sort(reports.begin(), reports.end(), [](const CheckpointReport& a, const CheckpointReport& b) {
    if (a.key() != b.key()) return a.key() > b.key();
    return a.epoch > b.epoch;
  });
  Ranking r;
  r.truncated_request = k > reports.size();
  reports.resize(std::min(k, reports.size()));
  r.top = std::move(reports);
  return r;
}

}  // namespace sedkit::evaluate
