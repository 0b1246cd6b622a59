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
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sedkit/common/binary_io.hpp"
#include "sedkit/common/error.hpp"
#include "sedkit/common/tensor.hpp"
#include "sedkit/datasets/class_map.hpp"
#include "sedkit/datasets/text.hpp"

namespace sedkit::datasets {

inline constexpr std::size_t kOutputFrames = 250;
inline constexpr double kOutputFrameSeconds = 0.04;
inline constexpr std::size_t kFramesPerSegment = 25;

struct StrongEvent {
  int class_id = 0;
  double onset_s = 0.0;
  double offset_s = 0.0;

  friend bool operator==(const StrongEvent&, const StrongEvent&) = default;
};

struct StrongLabelSet {
  std::vector<StrongEvent> events;
};

struct WeakLabelSet {
  std::set<int> present_classes;
};

/// n_segments x C probabilities on the 1-s grid.
struct SoftLabelSet {
  Tensor<float> segments;

  std::size_t n_segments() const { return segments.empty() ? 0 : segments.dim(0); }

  /// Zero-pads or truncates to n rows.
  SoftLabelSet Resized(std::size_t n, std::size_t n_classes) const {
    SoftLabelSet out;
    out.segments = Tensor<float>({n, n_classes});
    const std::size_t keep = std::min(n, n_segments());
    for (std::size_t s = 0; s < keep; ++s)
      for (std::size_t c = 0; c < n_classes; ++c) out.segments.at(s, c) = segments.at(s, c);
    return out;
  }
};

namespace detail {

inline std::vector<std::vector<std::string_view>> ReadTsvRows(
    std::string_view text, const std::string& source,
    const std::vector<std::string_view>& header, std::vector<std::size_t>* line_numbers) {
  auto lines = Lines(text);
  std::vector<std::vector<std::string_view>> rows;
  bool seen_header = false;
  for (const auto& [n, line] : lines) {
    if (Trim(line).empty()) continue;
    auto fields = Split(line, '\t');
    if (!seen_header) {
      seen_header = true;
      bool ok = fields.size() == header.size();
      for (std::size_t i = 0; ok && i < header.size(); ++i) ok = Trim(fields[i]) == header[i];
      if (!ok) {
        std::string expected;
        for (auto h : header) expected += std::string(expected.empty() ? "" : " ") + std::string(h);
        Fail(ErrorKind::kLabel, "{}:{}: expected header \"{}\"", source, n, expected);
      }
      continue;
    }
    if (fields.size() != header.size()) {
      Fail(ErrorKind::kLabel, "{}:{}: expected {} tab-separated columns, got {}", source, n,
           header.size(), fields.size());
    }
    rows.push_back(std::move(fields));
    line_numbers->push_back(n);
  }
  if (!seen_header) Fail(ErrorKind::kLabel, "{}: missing header", source);
  return rows;
}

inline double RequireNumber(std::string_view field, const std::string& source,
                            std::size_t line, const char* what) {
  auto v = ParseDouble(field);
  if (!v) Fail(ErrorKind::kLabel, "{}:{}: {} \"{}\" is not a number", source, line, what, field);
  return *v;
}

inline int ResolveOrFail(const ClassMap& map, std::string_view name, Vocabulary v,
                         const std::string& source, std::size_t line) {
  if (auto id = map.Find(Trim(name), v)) return *id;
  Fail(ErrorKind::kVocabulary, "{}:{}: unknown class name \"{}\"", source, line, Trim(name));
}

}  // namespace detail

/// TSV "filename onset offset event_label". Rows with an empty label are
/// kept as clips with no events.
inline std::map<std::string, StrongLabelSet> ParseStrongTsv(std::string_view text,
                                                            const ClassMap& map,
                                                            const std::string& source) {
  std::vector<std::size_t> lines;
  auto rows = detail::ReadTsvRows(text, source, {"filename", "onset", "offset", "event_label"}, &lines);
  std::map<std::string, StrongLabelSet> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string clip(Trim(r[0]));
    if (clip.empty()) Fail(ErrorKind::kLabel, "{}:{}: empty filename", source, lines[i]);
    auto& set = out[clip];
    if (Trim(r[3]).empty()) continue;
    const double on = detail::RequireNumber(r[1], source, lines[i], "onset");
    const double off = detail::RequireNumber(r[2], source, lines[i], "offset");
    if (on < 0.0 || !(on < off)) {
      Fail(ErrorKind::kLabel, "{}:{}: row {} needs 0 <= onset < offset (got {} .. {})", source,
           lines[i], i + 1, on, off);
    }
    const int id = detail::ResolveOrFail(map, r[3], Vocabulary::kDesed, source, lines[i]);
    set.events.push_back({id, on, off});
  }
  return out;
}

/// TSV "filename event_labels" with comma-separated labels.
inline std::map<std::string, WeakLabelSet> ParseWeakTsv(std::string_view text, const ClassMap& map,
                                                        const std::string& source) {
  std::vector<std::size_t> lines;
  auto rows = detail::ReadTsvRows(text, source, {"filename", "event_labels"}, &lines);
  std::map<std::string, WeakLabelSet> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string clip(Trim(rows[i][0]));
    if (clip.empty()) Fail(ErrorKind::kLabel, "{}:{}: empty filename", source, lines[i]);
    auto& set = out[clip];
    for (auto label : Split(rows[i][1], ',')) {
      if (Trim(label).empty()) continue;
      set.present_classes.insert(
          detail::ResolveOrFail(map, label, Vocabulary::kDesed, source, lines[i]));
    }
  }
  return out;
}

/// TSV "filename onset offset event_label confidence" on whole seconds.
/// A row fills every segment in [onset, offset); repeated cells keep the
/// maximum confidence.
inline std::map<std::string, SoftLabelSet> ParseSoftTsv(std::string_view text, const ClassMap& map,
                                                        const std::string& source) {
  std::vector<std::size_t> lines;
  auto rows = detail::ReadTsvRows(
      text, source, {"filename", "onset", "offset", "event_label", "confidence"}, &lines);
  struct Cell {
    std::size_t segment;
    int class_id;
    float value;
  };
  std::map<std::string, std::vector<Cell>> cells;
  std::map<std::string, std::size_t> lengths;
  constexpr double kMaxSeconds = 1e6;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string clip(Trim(r[0]));
    if (clip.empty()) Fail(ErrorKind::kLabel, "{}:{}: empty filename", source, lines[i]);
    const double on = detail::RequireNumber(r[1], source, lines[i], "onset");
    const double off = detail::RequireNumber(r[2], source, lines[i], "offset");
    const double conf = detail::RequireNumber(r[4], source, lines[i], "confidence");
    const double on_r = std::round(on), off_r = std::round(off);
    if (std::abs(on - on_r) > 1e-6 || std::abs(off - off_r) > 1e-6) {
      Fail(ErrorKind::kLabel, "{}:{}: segment boundaries must be whole seconds", source, lines[i]);
    }
    if (on_r < 0.0 || !(on_r < off_r) || off_r > kMaxSeconds) {
      Fail(ErrorKind::kLabel, "{}:{}: needs 0 <= onset < offset", source, lines[i]);
    }
    if (!(conf >= 0.0 && conf <= 1.0)) {
      Fail(ErrorKind::kLabel, "{}:{}: confidence {} outside [0,1]", source, lines[i], conf);
    }
    const int id = detail::ResolveOrFail(map, r[3], Vocabulary::kMaestro, source, lines[i]);
    auto& len = lengths[clip];
    for (auto s = static_cast<std::size_t>(on_r); s < static_cast<std::size_t>(off_r); ++s) {
      cells[clip].push_back({s, id, static_cast<float>(conf)});
      len = std::max(len, s + 1);
    }
  }
  std::map<std::string, SoftLabelSet> out;
  for (const auto& [clip, list] : cells) {
    SoftLabelSet set;
    set.segments = Tensor<float>({lengths[clip], map.size()});
    for (const auto& c : list) {
      auto& v = set.segments.at(c.segment, static_cast<std::size_t>(c.class_id));
      v = std::max(v, c.value);
    }
    out.emplace(clip, std::move(set));
  }
  return out;
}

inline std::map<std::string, StrongLabelSet> ReadStrongTsv(const std::filesystem::path& p,
                                                           const ClassMap& map) {
  return ParseStrongTsv(ReadTextFile(p), map, p.string());
}
inline std::map<std::string, WeakLabelSet> ReadWeakTsv(const std::filesystem::path& p,
                                                       const ClassMap& map) {
  return ParseWeakTsv(ReadTextFile(p), map, p.string());
}
inline std::map<std::string, SoftLabelSet> ReadSoftTsv(const std::filesystem::path& p,
                                                       const ClassMap& map) {
  return ParseSoftTsv(ReadTextFile(p), map, p.string());
}

namespace detail {

/// Seconds to grid units, snapping values within 1e-6 of an integer so that
/// boundaries like 1.0 / 0.04 land exactly on frame 25.
inline double ToGrid(double seconds, double step) {
  const double q = seconds / step;
  const double r = std::round(q);
  return std::abs(q - r) < 1e-6 ? r : q;
}

}  // namespace detail

/// frames x C binary grid; frame f is active for an event when
/// [f*step, (f+1)*step) overlaps [onset, offset). Events are clamped to the
/// grid.
inline Tensor<float> EncodeStrong(const StrongLabelSet& labels, std::size_t n_classes,
                                  std::size_t frames = kOutputFrames,
                                  double frame_s = kOutputFrameSeconds) {
  Tensor<float> grid({frames, n_classes});
  for (const auto& e : labels.events) {
    if (e.class_id < 0 || static_cast<std::size_t>(e.class_id) >= n_classes) {
      Fail(ErrorKind::kLabel, "class id {} outside [0, {})", e.class_id, n_classes);
    }
    const double on = std::max(0.0, std::floor(detail::ToGrid(e.onset_s, frame_s)));
    const double off = std::min(static_cast<double>(frames),
                                std::ceil(detail::ToGrid(e.offset_s, frame_s)));
    for (auto f = static_cast<std::int64_t>(on); f < static_cast<std::int64_t>(off); ++f) {
      grid.at(static_cast<std::size_t>(f), static_cast<std::size_t>(e.class_id)) = 1.0f;
    }
  }
  return grid;
}

inline Tensor<float> EncodeWeak(const WeakLabelSet& labels, std::size_t n_classes) {
  Tensor<float> v({n_classes});
  for (int id : labels.present_classes) {
    if (id < 0 || static_cast<std::size_t>(id) >= n_classes) {
      Fail(ErrorKind::kLabel, "class id {} outside [0, {})", id, n_classes);
    }
    v[static_cast<std::size_t>(id)] = 1.0f;
  }
  return v;
}

}  // namespace sedkit::datasets
