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
#include <filesystem>
#include <string>

#include "sedkit/common/binary_io.hpp"
#include "sedkit/common/random.hpp"
#include "sedkit/common/tensor.hpp"

// Pretrained frame embeddings [frames, dim] stored as "SEDE" files.

namespace sedkit::model {

inline std::vector<std::uint8_t> EncodeEmbeddings(const Tensor<float>& e) {
  if (e.rank() != 2) Fail(ErrorKind::kShape, "embeddings must be [frames, dim]");
  ByteWriter w;
  w.PutTag("SEDE");
  w.PutU32(static_cast<std::uint32_t>(e.dim(0)));
  w.PutU32(static_cast<std::uint32_t>(e.dim(1)));
  w.PutF32s(e.values());
  return std::move(w.bytes());
}

inline Tensor<float> DecodeEmbeddings(std::span<const std::uint8_t> bytes, const std::string& source) {
  ByteReader r(bytes, source);
  r.ExpectTag("SEDE");
  const std::uint64_t frames = r.GetU32();
  const std::uint64_t dim = r.GetU32();
  if (frames == 0 || dim == 0) r.Error("zero dimension");
  r.RequireElements(frames * dim, sizeof(float));
  Tensor<float> e({frames, dim});
  r.GetF32s(e.values());
  if (!r.AtEnd()) r.Error("trailing bytes");
  return e;
}

inline void WriteEmbeddings(const std::filesystem::path& path, const Tensor<float>& e) {
  WriteFileBytes(path, EncodeEmbeddings(e));
}

inline Tensor<float> ReadEmbeddings(const std::filesystem::path& path) {
  return DecodeEmbeddings(ReadFileBytes(path), path.string());
}

/// Linear interpolation onto out_frames equally spaced frame centres.
inline Tensor<float> AlignEmbeddings(const Tensor<float>& e, std::size_t out_frames) {
  const std::size_t in = e.dim(0), dim = e.dim(1);
  if (in == out_frames) return e;
  Tensor<float> out({out_frames, dim});
  const double ratio = static_cast<double>(in) / static_cast<double>(out_frames);
  for (std::size_t i = 0; i < out_frames; ++i) {
    const double pos = std::clamp((static_cast<double>(i) + 0.5) * ratio - 0.5, 0.0,
                                  static_cast<double>(in - 1));
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, in - 1);
    const double w = pos - static_cast<double>(lo);
    for (std::size_t d = 0; d < dim; ++d) {
      out.at(i, d) = static_cast<float>((1.0 - w) * e.at(lo, d) + w * e.at(hi, d));
    }
  }
  return out;
}

/// Seeded stand-in for an external encoder: uniform(-1, 1) values keyed by
/// clip id.
inline Tensor<float> StubEmbeddings(std::uint64_t seed, const std::string& clip_id, std::size_t frames,
                                    std::size_t dim) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : clip_id) h = (h ^ ch) * 1099511628211ull;
  Rng rng = DeriveRng(seed, {0xe3bu, h});
  Tensor<float> e({frames, dim});
  for (auto& v : e.values()) v = static_cast<float>(2.0 * Uniform01(rng) - 1.0);
  return e;
}

}  // namespace sedkit::model
