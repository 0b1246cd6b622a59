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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/datasets/text.hpp"

namespace sedkit::datasets {

/// Which vocabulary a label file speaks.
enum class Vocabulary { kDesed, kMaestro };

/// Unified class inventory over the DESED and MAESTRO vocabularies.
/// Ordering: classes with a DESED side first, then MAESTRO-only classes,
/// each group sorted by unified name.
class ClassMap {
 public:
  struct Entry {
    std::string unified;
    std::optional<std::string> desed;
    std::optional<std::string> maestro;
  };

  ClassMap() = default;

  static ClassMap FromEntries(std::vector<Entry> entries) {
    std::set<std::string> unified, desed, maestro;
    for (const auto& e : entries) {
      if (e.unified.empty()) Fail(ErrorKind::kVocabulary, "empty class name");
      if (!e.desed && !e.maestro) {
        Fail(ErrorKind::kVocabulary, "class {} maps to neither vocabulary", e.unified);
      }
      if (!unified.insert(e.unified).second) {
        Fail(ErrorKind::kVocabulary, "duplicate unified class {}", e.unified);
      }
      if (e.desed && !desed.insert(*e.desed).second) {
        Fail(ErrorKind::kVocabulary, "DESED class {} mapped twice", *e.desed);
      }
      if (e.maestro && !maestro.insert(*e.maestro).second) {
        Fail(ErrorKind::kVocabulary, "MAESTRO class {} mapped twice", *e.maestro);
      }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      const bool ad = a.desed.has_value(), bd = b.desed.has_value();
      if (ad != bd) return ad;
      return a.unified < b.unified;
    });
    ClassMap map;
    map.entries_ = std::move(entries);
    for (std::size_t i = 0; i < map.entries_.size(); ++i) {
      const auto& e = map.entries_[i];
      const int id = static_cast<int>(i);
      map.unified_index_[e.unified] = id;
      if (e.desed) map.desed_index_[*e.desed] = id;
      if (e.maestro) map.maestro_index_[*e.maestro] = id;
    }
    return map;
  }

  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& name(std::size_t id) const { return entries_.at(id).unified; }

  bool desed_visible(std::size_t id) const { return entries_.at(id).desed.has_value(); }
  bool maestro_visible(std::size_t id) const { return entries_.at(id).maestro.has_value(); }

  std::vector<bool> Mask(Vocabulary v) const {
    std::vector<bool> m(size());
    for (std::size_t i = 0; i < size(); ++i) {
      m[i] = v == Vocabulary::kDesed ? desed_visible(i) : maestro_visible(i);
    }
    return m;
  }

  std::vector<std::pair<std::string, std::string>> merge_pairs() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : entries_) {
      if (e.desed && e.maestro) out.emplace_back(*e.desed, *e.maestro);
    }
    return out;
  }

  /// Looks a label up by its source-vocabulary name, falling back to the
  /// unified name; the class must be visible to that vocabulary.
  std::optional<int> Find(std::string_view label, Vocabulary v) const {
    const std::string key(label);
    const auto& index = v == Vocabulary::kDesed ? desed_index_ : maestro_index_;
    if (auto it = index.find(key); it != index.end()) return it->second;
    if (auto it = unified_index_.find(key); it != unified_index_.end()) {
      const auto id = static_cast<std::size_t>(it->second);
      if (v == Vocabulary::kDesed ? desed_visible(id) : maestro_visible(id)) return it->second;
    }
    return std::nullopt;
  }

  int Resolve(std::string_view label, Vocabulary v) const {
    if (auto id = Find(label, v)) return *id;
    Fail(ErrorKind::kVocabulary, "unknown {} class name \"{}\"",
         v == Vocabulary::kDesed ? "DESED" : "MAESTRO", label);
  }

  std::optional<int> FindUnified(std::string_view name) const {
    auto it = unified_index_.find(std::string(name));
    if (it == unified_index_.end()) return std::nullopt;
    return it->second;
  }

  /// One line per class: "unified = desed | maestro".
  std::string Serialize() const {
    std::string out;
    for (const auto& e : entries_) {
      out += e.unified + " = " + e.desed.value_or("") + " | " + e.maestro.value_or("") + "\n";
    }
    return out;
  }

  friend bool operator==(const ClassMap& a, const ClassMap& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
      const auto &x = a.entries_[i], &y = b.entries_[i];
      if (x.unified != y.unified || x.desed != y.desed || x.maestro != y.maestro) return false;
    }
    return true;
  }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, int> unified_index_;
  std::map<std::string, int> desed_index_;
  std::map<std::string, int> maestro_index_;
};

/// Merged classes take the DESED name as their unified name.
inline ClassMap BuildClassMap(
    const std::vector<std::string>& desed_names,
    const std::vector<std::string>& maestro_names,
    const std::vector<std::pair<std::string, std::string>>& merges) {
  std::map<std::string, std::string> desed_to_maestro;
  std::set<std::string> merged_maestro;
  const std::set<std::string> desed(desed_names.begin(), desed_names.end());
  const std::set<std::string> maestro(maestro_names.begin(), maestro_names.end());
  for (const auto& [d, m] : merges) {
    if (!desed.count(d)) Fail(ErrorKind::kVocabulary, "merge references unknown DESED class \"{}\"", d);
    if (!maestro.count(m)) Fail(ErrorKind::kVocabulary, "merge references unknown MAESTRO class \"{}\"", m);
    desed_to_maestro[d] = m;
    merged_maestro.insert(m);
  }
  std::vector<ClassMap::Entry> entries;
  for (const auto& d : desed_names) {
    ClassMap::Entry e{d, d, std::nullopt};
    if (auto it = desed_to_maestro.find(d); it != desed_to_maestro.end()) e.maestro = it->second;
    entries.push_back(std::move(e));
  }
  for (const auto& m : maestro_names) {
    if (!merged_maestro.count(m)) entries.push_back({m, std::nullopt, m});
  }
  return ClassMap::FromEntries(std::move(entries));
}

/// Parses "unified = desed | maestro" lines; either side may be empty.
/// Blank lines and lines starting with '#' are ignored.
inline ClassMap ParseClassMap(std::string_view text, const std::string& source) {
  std::vector<ClassMap::Entry> entries;
  for (const auto& [line_no, raw] : Lines(text)) {
    const auto line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    const auto bar = line.find('|');
    if (eq == std::string_view::npos || bar == std::string_view::npos || bar < eq) {
      Fail(ErrorKind::kConfig, "{}:{}: expected \"unified = desed | maestro\"", source, line_no);
    }
    ClassMap::Entry e;
    e.unified = std::string(Trim(line.substr(0, eq)));
    const auto d = Trim(line.substr(eq + 1, bar - eq - 1));
    const auto m = Trim(line.substr(bar + 1));
    if (!d.empty()) e.desed = std::string(d);
    if (!m.empty()) e.maestro = std::string(m);
    if (e.unified.empty() || (!e.desed && !e.maestro)) {
      Fail(ErrorKind::kConfig, "{}:{}: class needs a name and at least one side", source, line_no);
    }
    entries.push_back(std::move(e));
  }
  try {
    return ClassMap::FromEntries(std::move(entries));
  } catch (const Error& e) {
    Fail(ErrorKind::kConfig, "{}: {}", source, e.message());
  }
}

inline const std::vector<std::string>& DesedClassNames() {
  static const std::vector<std::string> names = {
      "Alarm_bell_ringing", "Blender",  "Cat",    "Dishes",        "Dog",
      "Electric_shaver_toothbrush", "Frying", "Running_water", "Speech",
      "Vacuum_cleaner"};
  return names;
}

/// MAESTRO Real class names as published with the challenge metadata.
inline const std::vector<std::string>& MaestroClassNames() {
  static const std::vector<std::string> names = {
      "announcement",       "birds_singing",      "brakes_squeaking", "car",
      "cash_register_beeping", "children_voices", "coffee_machine",   "cutlery_and_dishes",
      "door_opens_closes",  "footsteps",          "furniture_dragging", "large_vehicle",
      "metro_approaching",  "metro_leaving",      "people_talking",   "shopping_cart",
      "wind_blowing"};
  return names;
}

/// The two merges named for the challenge: Speech/people_talking and
/// Dishes/cutlery_and_dishes. 10 + 17 - 2 = 25 classes.
inline ClassMap DefaultClassMap() {
  return BuildClassMap(DesedClassNames(), MaestroClassNames(),
                       {{"Speech", "people_talking"}, {"Dishes", "cutlery_and_dishes"}});
}

}  // namespace sedkit::datasets
