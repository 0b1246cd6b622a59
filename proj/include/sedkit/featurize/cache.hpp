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

#include <filesystem>
#include <string>

#include "sedkit/common/binary_io.hpp"
#include "sedkit/featurize/features.hpp"
#include "sedkit/featurize/norm.hpp"

namespace sedkit::featurize {

inline constexpr std::uint16_t kFeatureCacheVersion = 1;
inline constexpr std::uint16_t kNormStatsVersion = 1;

inline std::vector<std::uint8_t> EncodeFeatureTensor(const FeatureTensor& t) {
  ByteWriter w;
  w.PutTag("SEDF");
  w.PutU16(kFeatureCacheVersion);
  w.PutU32(static_cast<std::uint32_t>(t.channels()));
  w.PutU32(static_cast<std::uint32_t>(t.frames()));
  w.PutU32(static_cast<std::uint32_t>(t.bins()));
  w.PutU8(t.normalized ? 1 : 0);
  w.PutF32s(t.data.values());
  return std::move(w.bytes());
}

inline FeatureTensor DecodeFeatureTensor(std::span<const std::uint8_t> bytes,
                                         const std::string& source) {
  ByteReader r(bytes, source);
  r.ExpectTag("SEDF");
  const auto version = r.GetU16();
  if (version != kFeatureCacheVersion) {
    r.Error(fmt::format("unsupported version {}", version));
  }
  const std::uint64_t channels = r.GetU32();
  const std::uint64_t frames = r.GetU32();
  const std::uint64_t bins = r.GetU32();
  const auto normalized = r.GetU8();
  if (normalized > 1) r.Error("normalized flag must be 0 or 1");
  if (channels == 0 || frames == 0 || bins == 0) r.Error("zero dimension");
  const std::uint64_t count = channels * frames * bins;
  if (count / channels / frames != bins) r.Error("dimension overflow");
  r.RequireElements(count, sizeof(float));
  FeatureTensor t;
  t.data = Tensor<float>({channels, frames, bins});
  r.GetF32s(t.data.values());
  if (!r.AtEnd()) r.Error("trailing bytes");
  t.normalized = normalized == 1;
  return t;
}

inline void WriteFeatureCache(const std::filesystem::path& path,
                              const FeatureTensor& t) {
  WriteFileBytes(path, EncodeFeatureTensor(t));
}

inline FeatureTensor ReadFeatureCache(const std::filesystem::path& path) {
  return DecodeFeatureTensor(ReadFileBytes(path), path.string());
}

inline std::vector<std::uint8_t> EncodeNormStats(const NormStats& s) {
  ByteWriter w;
  w.PutTag("SEDN");
  w.PutU16(kNormStatsVersion);
  w.PutU32(static_cast<std::uint32_t>(s.channels()));
  for (double m : s.mean) w.PutF64(m);
  for (double d : s.std) w.PutF64(d);
  return std::move(w.bytes());
}

inline NormStats DecodeNormStats(std::span<const std::uint8_t> bytes,
                                 const std::string& source) {
  ByteReader r(bytes, source);
  r.ExpectTag("SEDN");
  const auto version = r.GetU16();
  if (version != kNormStatsVersion) {
    r.Error(fmt::format("unsupported version {}", version));
  }
  const std::uint32_t channels = r.GetU32();
  if (channels == 0) r.Error("zero channels");
  r.RequireElements(2ull * channels, sizeof(double));
  NormStats s;
  for (std::uint32_t c = 0; c < channels; ++c) s.mean.push_back(r.GetF64());
  for (std::uint32_t c = 0; c < channels; ++c) {
    const double d = r.GetF64();
    if (!(d > 0.0) || !std::isfinite(d)) r.Error("std must be positive and finite");
    s.std.push_back(d);
  }
  if (!r.AtEnd()) r.Error("trailing bytes");
  return s;
}

inline void WriteNormStats(const std::filesystem::path& path, const NormStats& s) {
  WriteFileBytes(path, EncodeNormStats(s));
}

inline NormStats ReadNormStats(const std::filesystem::path& path) {
  return DecodeNormStats(ReadFileBytes(path), path.string());
}

}  // namespace sedkit::featurize
