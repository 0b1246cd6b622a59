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
#include <cstdint>
#include <span>
#include <string_view>

#include <zlib.h>

namespace sedkit {

inline std::uint32_t Crc32(std::span<const std::uint8_t> bytes,
                           std::uint32_t seed = 0) {
  uLong crc = seed;
  const std::uint8_t* p = bytes.data();
  std::size_t left = bytes.size();
  while (left > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

inline std::uint32_t Crc32(std::string_view text, std::uint32_t seed = 0) {
  return Crc32(std::span<const std::uint8_t>(
                   reinterpret_cast<const std::uint8_t*>(text.data()),
                   text.size()),
               seed);
}

}  // namespace sedkit
