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

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sedkit/common/binary_io.hpp"
#include "sedkit/common/error.hpp"
#include "sedkit/datasets/class_map.hpp"
#include "sedkit/datasets/text.hpp"

namespace sedkit::datasets {

enum class Source { kWeak, kUnlabeled, kSynthStrong, kRealStrong, kMaestroSoft, kEval };

inline constexpr std::array<const char*, 6> kSourceNames = {
    "weak", "unlabeled", "synth_strong", "real_strong", "maestro_soft", "eval"};

inline const char* SourceName(Source s) { return kSourceNames[static_cast<std::size_t>(s)]; }

inline std::optional<Source> ParseSource(std::string_view name) {
  for (std::size_t i = 0; i < kSourceNames.size(); ++i) {
    if (name == kSourceNames[i]) return static_cast<Source>(i);
  }
  return std::nullopt;
}

inline bool IsStrong(Source s) { return s == Source::kSynthStrong || s == Source::kRealStrong; }
inline Vocabulary VocabularyOf(Source s) {
  return s == Source::kMaestroSoft ? Vocabulary::kMaestro : Vocabulary::kDesed;
}

struct ManifestEntry {
  std::string clip_id;
  std::filesystem::path path;  // resolved against the manifest directory
  Source source = Source::kEval;
};

/// Rows "clip_id<TAB>path<TAB>source"; an optional header row with those
/// names is skipped.
inline std::vector<ManifestEntry> ParseManifest(std::string_view text,
                                                const std::filesystem::path& base_dir,
                                                const std::string& source_name) {
  std::vector<ManifestEntry> out;
  bool first = true;
  for (const auto& [n, raw] : Lines(text)) {
    if (Trim(raw).empty() || Trim(raw).front() == '#') continue;
    auto fields = Split(raw, '\t');
    if (first) {
      first = false;
      if (fields.size() == 3 && Trim(fields[0]) == "clip_id") continue;
    }
    if (fields.size() != 3) {
      Fail(ErrorKind::kConfig, "{}:{}: expected clip_id, path, source", source_name, n);
    }
    ManifestEntry e;
    e.clip_id = std::string(Trim(fields[0]));
    const std::filesystem::path p(std::string(Trim(fields[1])));
    e.path = p.is_absolute() ? p : base_dir / p;
    auto src = ParseSource(Trim(fields[2]));
    if (!src) Fail(ErrorKind::kConfig, "{}:{}: unknown source \"{}\"", source_name, n, Trim(fields[2]));
    if (e.clip_id.empty()) Fail(ErrorKind::kConfig, "{}:{}: empty clip id", source_name, n);
    e.source = *src;
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ManifestEntry> ReadManifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) Fail(ErrorKind::kIngest, "manifest not found: {}", path.string());
  return ParseManifest(ReadTextFile(path), path.parent_path(), path.string());
}

}  // namespace sedkit::datasets
