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

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sedkit/common/checksum.hpp"
#include "sedkit/common/error.hpp"

namespace sedkit::testing {

struct FuzzStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;       // sedkit::Error
  std::size_t foreign = 0;        // anything else thrown
  std::string first_foreign;
};

inline std::vector<std::uint8_t> Mutate(std::vector<std::uint8_t> b, std::mt19937_64& rng) {
  auto pick = [&](std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(rng() % n); };
  switch (rng() % 6) {
    case 0:  // flip a few bytes
      for (int i = 0, n = 1 + static_cast<int>(rng() % 8); i < n && !b.empty(); ++i) b[pick(b.size())] ^= static_cast<std::uint8_t>(1 + rng() % 255);
      break;
    case 1:  // truncate
      b.resize(pick(b.size() + 1));
      break;
    case 2:  // insert random bytes
      for (int i = 0, n = 1 + static_cast<int>(rng() % 16); i < n; ++i) b.insert(b.begin() + static_cast<long>(pick(b.size() + 1)), static_cast<std::uint8_t>(rng()));
      break;
    case 3:  // overwrite a word with an extreme value
      if (b.size() >= 4) {
        const std::size_t at = pick(b.size() - 3);
        const std::uint32_t v = rng() % 2 ? 0xFFFFFFFFu : static_cast<std::uint32_t>(rng());
        for (int k = 0; k < 4; ++k) b[at + static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(v >> (8 * k));
      }
      break;
    case 4:  // duplicate a range
      if (!b.empty()) {
        const std::size_t lo = pick(b.size()), len = pick(std::min<std::size_t>(64, b.size() - lo) + 1);
        std::vector<std::uint8_t> chunk(b.begin() + static_cast<long>(lo), b.begin() + static_cast<long>(lo + len));
        b.insert(b.begin() + static_cast<long>(pick(b.size() + 1)), chunk.begin(), chunk.end());
      }
      break;
    default:  // pure garbage
      b.resize(pick(256));
      for (auto& v : b) v = static_cast<std::uint8_t>(rng());
  }
  return b;
}

/// Text mutations biased towards delimiters, digits and line structure.
inline std::string MutateText(std::string s, std::mt19937_64& rng) {
  static const std::string alphabet = "\t\n\r ,.-+eE0123456789aAnNiIfx|=#@_";
  auto pick = [&](std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(rng() % n); };
  for (int i = 0, n = 1 + static_cast<int>(rng() % 6); i < n; ++i) {
    switch (rng() % 5) {
      case 0:
        if (!s.empty()) s[pick(s.size())] = alphabet[pick(alphabet.size())];
        break;
      case 1:
        s.insert(pick(s.size() + 1), 1, alphabet[pick(alphabet.size())]);
        break;
      case 2:
        if (!s.empty()) s.erase(pick(s.size()), 1 + pick(8));
        break;
      case 3:
        s.insert(pick(s.size() + 1), 1, static_cast<char>(rng()));
        break;
      default: {
        const auto nl = s.find('\n', pick(s.size() + 1));
        if (nl != std::string::npos) s.insert(nl + 1, s.substr(0, s.find('\n')) + "\n");
      }
    }
  }
  return s;
}

template <typename Fn>
void Classify(FuzzStats& st, Fn&& fn) {
  try {
    fn();
    ++st.accepted;
  } catch (const Error&) {
    ++st.rejected;
  } catch (const std::exception& e) {
    if (st.foreign++ == 0) st.first_foreign = e.what();
  } catch (...) {
    if (st.foreign++ == 0) st.first_foreign = "non-standard exception";
  }
}

inline FuzzStats FuzzBinary(const std::vector<std::uint8_t>& seed_input, std::size_t iterations, std::uint64_t seed,
                            const std::function<void(const std::vector<std::uint8_t>&)>& decode,
                            bool fix_trailing_crc = false) {
  std::mt19937_64 rng(seed);
  FuzzStats st;
  for (std::size_t i = 0; i < iterations; ++i) {
    auto b = Mutate(seed_input, rng);
    if (fix_trailing_crc && b.size() >= 4 && rng() % 2) {
      const auto crc = Crc32(std::span<const std::uint8_t>(b.data(), b.size() - 4));
      for (int k = 0; k < 4; ++k) b[b.size() - 4 + static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(crc >> (8 * k));
    }
    Classify(st, [&] { decode(b); });
  }
  return st;
}

inline FuzzStats FuzzText(const std::string& seed_input, std::size_t iterations, std::uint64_t seed,
                          const std::function<void(const std::string&)>& parse) {
  std::mt19937_64 rng(seed);
  FuzzStats st;
  for (std::size_t i = 0; i < iterations; ++i) {
    const auto s = MutateText(seed_input, rng);
    Classify(st, [&] { parse(s); });
  }
  return st;
}

}  // namespace sedkit::testing
