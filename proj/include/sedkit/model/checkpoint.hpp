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
#include <optional>
#include <string>
#include <vector>

#include "sedkit/common/binary_io.hpp"
#include "sedkit/common/checksum.hpp"
#include "sedkit/model/config.hpp"
#include "sedkit/model/parameters.hpp"

// SEDM checkpoint: magic, version, config block, named f32 tensors, an
// optional metadata block and a trailing CRC-32 of everything before it.
// Tensor names carry a group prefix ("student.", "teacher.", "adam_m.", ...).

namespace sedkit::model {

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint32_t epoch = 0;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  std::vector<double> scores;

  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

struct Checkpoint {
  ModelConfig config;
  ParameterSet<float> tensors;
  std::optional<CheckpointMeta> meta;

  /// Adds every tensor of params under "<group>.".
  template <typename T>
  void AddGroup(const std::string& group, const ParameterSet<T>& params) {
    for (const auto& e : params.entries()) {
      tensors.Add(group + "." + e.name, e.value.template Cast<float>(), e.trainable);
    }
  }

  bool HasGroup(const std::string& group) const {
    for (const auto& e : tensors.entries()) {
      if (e.name.rfind(group + ".", 0) == 0) return true;
    }
    return false;
  }

  /// The group's tensors in the config's layout order. Optimizer moment
  /// groups hold trainable tensors only.
  template <typename T = float>
  ParameterSet<T> Group(const std::string& group, bool trainable_only = false) const {
    ParameterSet<T> out;
    for (const auto& spec : BuildParamSpecs(config)) {
      if (trainable_only && !spec.trainable) continue;
      const std::string name = group + "." + spec.name;
      if (!tensors.Contains(name)) Fail(ErrorKind::kCacheFormat, "checkpoint lacks tensor {}", name);
      const auto& t = tensors.Get(name);
      if (t.shape() != spec.shape) {
        Fail(ErrorKind::kCacheFormat, "checkpoint tensor {} has shape {}, expected {}", name,
             ShapeString(t.shape()), ShapeString(spec.shape));
      }
      out.Add(spec.name, t.template Cast<T>(), spec.trainable);
    }
    return out;
  }
};

namespace detail {

inline void PutConfig(ByteWriter& w, const ModelConfig& c) {
  auto u32 = [&](std::size_t v) { w.PutU32(static_cast<std::uint32_t>(v)); };
  u32(c.n_classes);
  u32(c.in_channels);
  u32(c.n_bins);
  u32(c.n_blocks());
  for (std::size_t i = 0; i < c.n_blocks(); ++i) {
    u32(c.conv_channels[i]);
    u32(c.time_pool[i]);
    u32(c.freq_pool[i]);
  }
  u32(c.fdy_basis);
  w.PutF64(c.fdy_temperature);
  u32(c.lka_dw_kernel);
  u32(c.lka_dilated_kernel);
  u32(c.lka_dilation);
  u32(c.rnn_hidden);
  w.PutF64(c.dropout);
  u32(c.embedding_dim);
}

inline ModelConfig GetConfig(ByteReader& r) {
  ModelConfig c;
  c.n_classes = r.GetU32();
  c.in_channels = r.GetU32();
  c.n_bins = r.GetU32();
  const std::uint32_t blocks = r.GetU32();
  r.RequireElements(blocks, 12);
  c.conv_channels.assign(blocks, 0);
  c.time_pool.assign(blocks, 0);
  c.freq_pool.assign(blocks, 0);
  for (std::size_t i = 0; i < blocks; ++i) {
    c.conv_channels[i] = r.GetU32();
    c.time_pool[i] = r.GetU32();
    c.freq_pool[i] = r.GetU32();
  }
  c.fdy_basis = r.GetU32();
  c.fdy_temperature = r.GetF64();
  c.lka_dw_kernel = r.GetU32();
  c.lka_dilated_kernel = r.GetU32();
  c.lka_dilation = r.GetU32();
  c.rnn_hidden = r.GetU32();
  c.dropout = r.GetF64();
  c.embedding_dim = r.GetU32();
  try {
    c.Validate();
  } catch (const sedkit::Error& e) {
    r.Error(fmt::format("invalid model config: {}", e.message()));
  }
  return c;
}

}  // namespace detail

inline std::vector<std::uint8_t> EncodeCheckpoint(const Checkpoint& ckpt) {
  ByteWriter w;
  w.PutTag("SEDM");
  w.PutU16(kCheckpointVersion);
  detail::PutConfig(w, ckpt.config);
  w.PutU32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& e : ckpt.tensors.entries()) {
    w.PutShortString(e.name);
    w.PutU8(static_cast<std::uint8_t>(e.value.rank()));
    for (auto d : e.value.shape()) w.PutU32(static_cast<std::uint32_t>(d));
    w.PutF32s(e.value.values());
  }
  if (ckpt.meta) {
    w.PutU8(1);
    w.PutTag("META");
    w.PutU32(ckpt.meta->epoch);
    w.PutU64(ckpt.meta->step);
    w.PutU64(ckpt.meta->seed);
    w.PutU32(static_cast<std::uint32_t>(ckpt.meta->scores.size()));
    for (double s : ckpt.meta->scores) w.PutF64(s);
  } else {
    w.PutU8(0);
  }
  const std::uint32_t crc = Crc32(std::span<const std::uint8_t>(w.bytes()));
  w.PutU32(crc);
  return std::move(w.bytes());
}

inline Checkpoint DecodeCheckpoint(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.size() < 4 + 2 + 4) Fail(ErrorKind::kCacheFormat, "{}: too short for a checkpoint", source);
  ByteReader head(bytes, source);
  head.ExpectTag("SEDM");
  const auto body = bytes.first(bytes.size() - 4);
  ByteReader tail(bytes.subspan(bytes.size() - 4), source);
  const std::uint32_t stored = tail.GetU32();
  if (Crc32(body) != stored) {
    Fail(ErrorKind::kChecksum, "{}: checksum mismatch (file corrupted)", source);
  }
  ByteReader r(body, source);
  r.ExpectTag("SEDM");
  const auto version = r.GetU16();
  if (version != kCheckpointVersion) r.Error(fmt::format("unsupported version {}", version));
  Checkpoint ckpt;
  ckpt.config = detail::GetConfig(r);
  const std::uint32_t n = r.GetU32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.GetShortString();
    const std::uint8_t rank = r.GetU8();
    std::vector<std::size_t> shape(rank);
    std::uint64_t count = 1;
    for (auto& d : shape) {
      d = r.GetU32();
      count *= d;
      if (count > bytes.size()) r.Error(fmt::format("tensor {} is larger than the file", name));
    }
    r.RequireElements(count, sizeof(float));
    Tensor<float> t(shape);
    r.GetF32s(t.values());
    if (ckpt.tensors.Contains(name)) r.Error(fmt::format("duplicate tensor {}", name));
    const bool trainable = name.find(".bn.running_") == std::string::npos;
    ckpt.tensors.Add(std::move(name), std::move(t), trainable);
  }
  const std::uint8_t has_meta = r.GetU8();
  if (has_meta > 1) r.Error("metadata flag must be 0 or 1");
  if (has_meta) {
    r.ExpectTag("META");
    CheckpointMeta m;
    m.epoch = r.GetU32();
    m.step = r.GetU64();
    m.seed = r.GetU64();
    const std::uint32_t ns = r.GetU32();
    r.RequireElements(ns, sizeof(double));
    m.scores.resize(ns);
    for (auto& s : m.scores) s = r.GetF64();
    ckpt.meta = std::move(m);
  }
  if (!r.AtEnd()) r.Error("trailing bytes");
  return ckpt;
}

inline void WriteCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  WriteFileBytes(path, EncodeCheckpoint(ckpt));
}

inline Checkpoint ReadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(ReadFileBytes(path), path.string());
}

}  // namespace sedkit::model
