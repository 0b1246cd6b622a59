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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sedkit/common/error.hpp"

namespace sedkit {

namespace detail {

template <typename U>
U ToLittle(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U out{};
    auto* src = reinterpret_cast<const unsigned char*>(&v);
    auto* dst = reinterpret_cast<unsigned char*>(&out);
    for (std::size_t i = 0; i < sizeof(U); ++i) dst[i] = src[sizeof(U) - 1 - i];
    return out;
  } else {
    return v;
  }
}

}  // namespace detail

/// Little-endian serializer into an in-memory buffer.
class ByteWriter {
 public:
  void PutBytes(std::span<const std::uint8_t> bytes) {
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  }
  void PutTag(std::string_view tag) {
    PutBytes({reinterpret_cast<const std::uint8_t*>(tag.data()), tag.size()});
  }
  void PutU8(std::uint8_t v) { buffer_.push_back(v); }
  void PutU16(std::uint16_t v) { PutRaw(v); }
  void PutU32(std::uint32_t v) { PutRaw(v); }
  void PutU64(std::uint64_t v) { PutRaw(v); }
  void PutF32(float v) { PutRaw(std::bit_cast<std::uint32_t>(v)); }
  void PutF64(double v) { PutRaw(std::bit_cast<std::uint64_t>(v)); }
  void PutF32s(std::span<const float> values) {
    if constexpr (std::endian::native == std::endian::little) {
      const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
      buffer_.insert(buffer_.end(), p, p + values.size_bytes());
    } else {
      for (float v : values) PutF32(v);
    }
  }
  /// u16 length prefix followed by the raw bytes.
  void PutShortString(std::string_view s) {
    if (s.size() > 0xFFFF) Fail(ErrorKind::kParameter, "string too long: {}", s.size());
    PutU16(static_cast<std::uint16_t>(s.size()));
    PutTag(s);
  }

  const std::vector<std::uint8_t>& bytes() const { return buffer_; }
  std::vector<std::uint8_t>& bytes() { return buffer_; }

 private:
  template <typename U>
  void PutRaw(U v) {
    U le = detail::ToLittle(v);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&le);
    buffer_.insert(buffer_.end(), p, p + sizeof(U));
  }

  std::vector<std::uint8_t> buffer_;
};

/// Bounds-checked little-endian reader. Every failure names the source and
/// the byte offset where decoding stopped.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return bytes_.size() - offset_; }
  bool AtEnd() const { return offset_ == bytes_.size(); }
  const std::string& source() const { return source_; }

  [[noreturn]] void Error(std::string_view what) const {
    Fail(ErrorKind::kCacheFormat, "{} at byte offset {}: {}", source_, offset_,
         what);
  }

  void Require(std::size_t n) const {
    if (remaining() < n) {
      Error(fmt::format("truncated: need {} bytes, {} left", n, remaining()));
    }
  }

  void ExpectTag(std::string_view tag) {
    Require(tag.size());
    if (std::memcmp(bytes_.data() + offset_, tag.data(), tag.size()) != 0) {
      Error(fmt::format("bad magic, expected \"{}\"", tag));
    }
    offset_ += tag.size();
  }
  bool PeekTag(std::string_view tag) const {
    return remaining() >= tag.size() &&
           std::memcmp(bytes_.data() + offset_, tag.data(), tag.size()) == 0;
  }

  std::uint8_t GetU8() {
    Require(1);
    return bytes_[offset_++];
  }
  std::uint16_t GetU16() { return GetRaw<std::uint16_t>(); }
  std::uint32_t GetU32() { return GetRaw<std::uint32_t>(); }
  std::uint64_t GetU64() { return GetRaw<std::uint64_t>(); }
  float GetF32() { return std::bit_cast<float>(GetRaw<std::uint32_t>()); }
  double GetF64() { return std::bit_cast<double>(GetRaw<std::uint64_t>()); }

  void GetF32s(std::span<float> out) {
    Require(out.size_bytes());
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data(), bytes_.data() + offset_, out.size_bytes());
      offset_ += out.size_bytes();
    } else {
      for (float& v : out) v = GetF32();
    }
  }

  std::string GetString(std::size_t n) {
    Require(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + offset_), n);
    offset_ += n;
    return s;
  }
  std::string GetShortString() { return GetString(GetU16()); }

  /// Checks that count elements of elem_size bytes fit in what is left,
  /// before anything is allocated for them.
  void RequireElements(std::uint64_t count, std::size_t elem_size) const {
    if (elem_size != 0 && count > remaining() / elem_size) {
      Error(fmt::format("declared {} elements of {} bytes exceed remaining {}",
                        count, elem_size, remaining()));
    }
  }

 private:
  template <typename U>
  U GetRaw() {
    Require(sizeof(U));
    U v;
    std::memcpy(&v, bytes_.data() + offset_, sizeof(U));
    offset_ += sizeof(U);
    return detail::ToLittle(v);
  }

  std::span<const std::uint8_t> bytes_;
  std::string source_;
  std::size_t offset_ = 0;
};

inline std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIngest, "cannot open {}", path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()),
                           static_cast<std::streamsize>(size))) {
    Fail(ErrorKind::kIngest, "failed reading {}", path.string());
  }
  return bytes;
}

/// Writes through a temporary sibling and renames, so readers never observe
/// a half-written artifact.
inline void WriteFileBytes(const std::filesystem::path& path,
                           std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorKind::kIngest, "cannot write {}", tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) Fail(ErrorKind::kIngest, "failed writing {}", tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    Fail(ErrorKind::kIngest, "cannot move {} into place: {}", path.string(),
         ec.message());
  }
}

inline std::string ReadTextFile(const std::filesystem::path& path) {
  auto bytes = ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace sedkit
