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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sedkit/common/binary_io.hpp"
#include "sedkit/common/error.hpp"

namespace sedkit::featurize {

/// Decoded PCM data before any resampling.
struct WavData {
  int sample_rate = 0;
  int channels = 0;
  std::vector<std::vector<float>> channel_samples;  // [channel][frame]
};

namespace detail {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

[[noreturn]] inline void WavFormatError(const std::string& path,
                                        const std::string& what) {
  Fail(ErrorKind::kFormat, "{}: {}", path, what);
}

}  // namespace detail

/// Parses a RIFF/WAVE file holding 16-bit integer or 32-bit float PCM with
/// one or two channels.
inline WavData DecodeWav(std::span<const std::uint8_t> bytes,
                         const std::string& path) {
  using detail::WavFormatError;
  ByteReader r(bytes, path);
  if (!r.PeekTag("RIFF")) WavFormatError(path, "not a RIFF file");
  r.ExpectTag("RIFF");
  if (r.remaining() < 8) WavFormatError(path, "truncated RIFF header");
  r.GetU32();
  if (!r.PeekTag("WAVE")) WavFormatError(path, "not a WAVE file");
  r.ExpectTag("WAVE");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> payload;
  bool have_data = false;

  while (r.remaining() >= 8 && !have_data) {
    std::string id = r.GetString(4);
    std::uint32_t size = r.GetU32();
    if (id == "fmt ") {
      if (size < 16 || r.remaining() < size) {
        WavFormatError(path, "malformed fmt chunk");
      }
      const std::size_t chunk_start = r.offset();
      format = r.GetU16();
      channels = r.GetU16();
      rate = r.GetU32();
      r.GetU32();  // byte rate
      r.GetU16();  // block align
      bits = r.GetU16();
      if (format == detail::kFormatExtensible && size >= 40) {
        r.GetU16();  // cb size
        r.GetU16();  // valid bits
        r.GetU32();  // channel mask
        format = r.GetU16();  // leading two bytes of the subformat GUID
      }
      const std::size_t consumed = r.offset() - chunk_start;
      r.GetString(size - consumed + (size & 1u));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) WavFormatError(path, "data chunk before fmt chunk");
      std::size_t n = std::min<std::size_t>(size, r.remaining());
      payload = bytes.subspan(r.offset(), n);
      have_data = true;
    } else {
      std::size_t skip = size + (size & 1u);
      if (skip > r.remaining()) break;
      r.GetString(skip);
    }
  }
  if (!have_fmt) WavFormatError(path, "missing fmt chunk");
  if (!have_data) WavFormatError(path, "missing data chunk");
  if (channels < 1 || channels > 2) {
    WavFormatError(path, fmt::format("unsupported channel count {}", channels));
  }
  if (rate == 0) WavFormatError(path, "zero sample rate");

  std::size_t bytes_per_sample = 0;
  if (format == detail::kFormatPcm && bits == 16) {
    bytes_per_sample = 2;
  } else if (format == detail::kFormatFloat && bits == 32) {
    bytes_per_sample = 4;
  } else {
    WavFormatError(path, fmt::format("unsupported encoding (format {}, {} bits)",
                                     format, bits));
  }

  WavData wav;
  wav.sample_rate = static_cast<int>(rate);
  wav.channels = channels;
  const std::size_t frames = payload.size() / (bytes_per_sample * channels);
  wav.channel_samples.assign(channels, std::vector<float>(frames));
  ByteReader pr(payload, path);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      float v;
      if (bytes_per_sample == 2) {
        v = static_cast<float>(static_cast<std::int16_t>(pr.GetU16())) / 32768.0f;
      } else {
        v = pr.GetF32();
      }
      if (!std::isfinite(v)) WavFormatError(path, "non-finite sample");
      wav.channel_samples[c][f] = v;
    }
  }
  return wav;
}

inline WavData ReadWav(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = ReadFileBytes(path);
  } catch (const Error&) {
    Fail(ErrorKind::kIngest, "cannot read audio file {}", path.string());
  }
  return DecodeWav(bytes, path.string());
}

enum class WavEncoding { kPcm16, kFloat32 };

/// Encodes interleaved-by-channel samples; used by fixtures and tools.
inline std::vector<std::uint8_t> EncodeWav(
    const std::vector<std::vector<float>>& channel_samples, int sample_rate,
    WavEncoding encoding = WavEncoding::kPcm16) {
  const auto channels = static_cast<std::uint16_t>(channel_samples.size());
  const std::size_t frames = channels ? channel_samples[0].size() : 0;
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(frames * channels * (bits / 8));
  ByteWriter w;
  w.PutTag("RIFF");
  w.PutU32(36 + data_bytes);
  w.PutTag("WAVE");
  w.PutTag("fmt ");
  w.PutU32(16);
  w.PutU16(encoding == WavEncoding::kPcm16 ? detail::kFormatPcm
                                           : detail::kFormatFloat);
  w.PutU16(channels);
  w.PutU32(static_cast<std::uint32_t>(sample_rate));
  w.PutU32(static_cast<std::uint32_t>(sample_rate) * channels * (bits / 8));
  w.PutU16(static_cast<std::uint16_t>(channels * (bits / 8)));
  w.PutU16(bits);
  w.PutTag("data");
  w.PutU32(data_bytes);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      const float v = channel_samples[c][f];
      if (encoding == WavEncoding::kPcm16) {
        const float clamped = std::clamp(v, -1.0f, 1.0f);
        const long q = std::lround(clamped * 32767.0f);
        w.PutU16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
      } else {
        w.PutF32(v);
      }
    }
  }
  return std::move(w.bytes());
}

inline void WriteWav(const std::filesystem::path& path,
                     const std::vector<std::vector<float>>& channel_samples,
                     int sample_rate,
                     WavEncoding encoding = WavEncoding::kPcm16) {
  auto bytes = EncodeWav(channel_samples, sample_rate, encoding);
  WriteFileBytes(path, bytes);
}

}  // namespace sedkit::featurize
