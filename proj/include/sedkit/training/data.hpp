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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/datasets/batching.hpp"
#include "sedkit/datasets/class_map.hpp"
#include "sedkit/datasets/crop.hpp"
#include "sedkit/datasets/labels.hpp"
#include "sedkit/datasets/manifest.hpp"
#include "sedkit/featurize/cache.hpp"
#include "sedkit/featurize/features.hpp"
#include "sedkit/featurize/norm.hpp"
#include "sedkit/model/config.hpp"
#include "sedkit/model/embeddings.hpp"
#include "sedkit/training/augment.hpp"
#include "sedkit/training/config.hpp"

namespace sedkit::training {

inline datasets::ClassMap LoadClassMap(const std::filesystem::path& path) {
  if (path.empty()) return datasets::DefaultClassMap();
  if (!std::filesystem::exists(path)) Fail(ErrorKind::kConfig, "class map not found: {}", path.string());
  return datasets::ParseClassMap(ReadTextFile(path), path.string());
}

/// Feature tensors for manifest entries: a cached <clip_id>.sedf in the
/// features directory when present, else the entry's own .sedf path, else
/// extracted from its WAV.
class FeatureSource {
 public:
  explicit FeatureSource(std::filesystem::path features_dir) : dir_(std::move(features_dir)) {}

  featurize::FeatureTensor Raw(const datasets::ManifestEntry& e) const {
    if (!dir_.empty()) {
      const auto p = dir_ / (e.clip_id + ".sedf");
      if (std::filesystem::exists(p)) return featurize::ReadFeatureCache(p);
    }
    if (e.path.extension() == ".sedf") return featurize::ReadFeatureCache(e.path);
    if (!std::filesystem::exists(e.path)) Fail(ErrorKind::kIngest, "audio not found: {}", e.path.string());
    if (!extractor_) extractor_.emplace();
    auto clip = featurize::LoadWav(e.path);
    return extractor_->Extract(featurize::FixLength(std::move(clip), extractor_->config().ExpectedSamples()));
  }

 private:
  std::filesystem::path dir_;
  mutable std::optional<featurize::FeatureExtractor> extractor_;
};

inline Tensor<float> Normalized(featurize::FeatureTensor t, const featurize::NormStats& stats) {
  if (!t.normalized) t = featurize::Normalize(std::move(t), stats);
  return std::move(t.data);
}

/// Frame-level embeddings on the output grid, read from <clip_id>.sede or
/// generated by the seeded stand-in when no directory is configured.
inline Tensor<float> LoadEmbeddings(const DataPaths& paths, const model::ModelConfig& mc, std::uint64_t seed,
                                    const std::string& clip_id) {
  if (mc.embedding_dim == 0) return {};
  if (paths.embeddings.empty()) return model::StubEmbeddings(seed, clip_id, datasets::kOutputFrames, mc.embedding_dim);
  const auto p = paths.embeddings / (clip_id + ".sede");
  auto e = model::ReadEmbeddings(p);
  if (e.dim(1) != mc.embedding_dim) {
    Fail(ErrorKind::kShape, "{}: embedding dim {}, model expects {}", p.string(), e.dim(1), mc.embedding_dim);
  }
  return model::AlignEmbeddings(e, datasets::kOutputFrames);
}

inline void CheckFeatureShape(const Tensor<float>& f, const model::ModelConfig& mc, const std::string& clip_id) {
  if (f.rank() != 3 || f.dim(0) != mc.in_channels || f.dim(2) != mc.n_bins) {
    Fail(ErrorKind::kShape, "clip {}: features {} do not fit model input ({} channels, {} bins)", clip_id,
         ShapeString(f.shape()), mc.in_channels, mc.n_bins);
  }
  if (mc.OutputFrames(f.dim(1)) != datasets::kOutputFrames) {
    Fail(ErrorKind::kShape, "clip {}: {} frames give {} output frames, labels need {}", clip_id, f.dim(1),
         mc.OutputFrames(f.dim(1)), datasets::kOutputFrames);
  }
}

inline std::optional<datasets::BatchGroup> GroupOf(datasets::Source s) {
  using datasets::BatchGroup;
  using datasets::Source;
  switch (s) {
    case Source::kWeak: return BatchGroup::kWeak;
    case Source::kUnlabeled: return BatchGroup::kUnlabeled;
    case Source::kSynthStrong:
    case Source::kRealStrong: return BatchGroup::kStrong;
    case Source::kMaestroSoft: return BatchGroup::kMaestro;
    case Source::kEval: return std::nullopt;
  }
  return std::nullopt;
}

/// Soft rows of a clip, or of its parent when the id names a crop
/// ("<parent>@<k>").
inline std::optional<datasets::SoftLabelSet> SoftFor(const std::map<std::string, datasets::SoftLabelSet>& soft,
                                                     const std::string& clip_id, std::size_t n_classes) {
  const std::size_t segments = datasets::kOutputFrames / datasets::kFramesPerSegment;
  if (auto it = soft.find(clip_id); it != soft.end()) return it->second.Resized(segments, n_classes);
  const auto at = clip_id.rfind('@');
  if (at == std::string::npos) return std::nullopt;
  auto it = soft.find(clip_id.substr(0, at));
  if (it == soft.end()) return std::nullopt;
  std::size_t k = 0;
  try {
    k = std::stoul(clip_id.substr(at + 1));
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return datasets::SliceSoft(it->second, k, segments, n_classes);
}

struct Corpus {
  datasets::ClassMap class_map;
  featurize::NormStats stats;
  std::vector<TrainingExample> examples;
  std::array<std::vector<std::size_t>, datasets::kBatchGroups> groups;  // indices into examples

  std::array<std::size_t, datasets::kBatchGroups> group_sizes() const {
    std::array<std::size_t, datasets::kBatchGroups> n{};
    for (std::size_t g = 0; g < n.size(); ++g) n[g] = groups[g].size();
    return n;
  }
  const TrainingExample& at(datasets::BatchItem item) const {
    return examples[groups[static_cast<std::size_t>(item.group)].at(item.index)];
  }
};

inline Tensor<float> MaskTensor(const std::vector<bool>& m) {
  Tensor<float> t({m.size()});
  for (std::size_t i = 0; i < m.size(); ++i) t[i] = m[i] ? 1.0f : 0.0f;
  return t;
}

/// Loads features and labels for every training manifest entry.
/// Normalization uses data.stats when given, else statistics of this set.
inline Corpus LoadCorpus(const TrainConfig& cfg, const std::vector<datasets::ManifestEntry>& manifest) {
  const auto& d = cfg.data;
  const auto& mc = cfg.model;
  Corpus c;
  c.class_map = LoadClassMap(d.class_map);
  const std::size_t C = c.class_map.size();
  if (C != mc.n_classes) {
    Fail(ErrorKind::kConfig, "class map has {} classes, model has {}", C, mc.n_classes);
  }
  std::map<std::string, datasets::StrongLabelSet> strong;
  for (const auto& p : d.strong_labels) {
    for (auto& [id, set] : datasets::ReadStrongTsv(p, c.class_map)) {
      auto& dst = strong[id].events;
      dst.insert(dst.end(), set.events.begin(), set.events.end());
    }
  }
  std::map<std::string, datasets::WeakLabelSet> weak;
  if (!d.weak_labels.empty()) weak = datasets::ReadWeakTsv(d.weak_labels, c.class_map);
  std::map<std::string, datasets::SoftLabelSet> soft;
  if (!d.soft_labels.empty()) soft = datasets::ReadSoftTsv(d.soft_labels, c.class_map);

  FeatureSource features(d.features);
  std::vector<featurize::FeatureTensor> raw;
  raw.reserve(manifest.size());
  for (const auto& e : manifest) {
    const auto g = GroupOf(e.source);
    if (!g) Fail(ErrorKind::kConfig, "clip {}: source {} cannot be used for training", e.clip_id, SourceName(e.source));
    raw.push_back(features.Raw(e));
  }
  if (!d.stats.empty()) {
    c.stats = featurize::ReadNormStats(d.stats);
  } else {
    featurize::NormAccumulator acc;
    for (const auto& t : raw) {
      if (t.normalized) Fail(ErrorKind::kConfig, "normalized feature caches need a stats file");
      acc.Add(t);
    }
    c.stats = acc.Finish();
  }
  const auto desed_mask = MaskTensor(c.class_map.Mask(datasets::Vocabulary::kDesed));
  const auto maestro_mask = MaskTensor(c.class_map.Mask(datasets::Vocabulary::kMaestro));
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& e = manifest[i];
    TrainingExample ex;
    ex.clip_id = e.clip_id;
    ex.source = e.source;
    ex.features = Normalized(std::move(raw[i]), c.stats);
    CheckFeatureShape(ex.features, mc, e.clip_id);
    ex.mask = e.source == datasets::Source::kMaestroSoft ? maestro_mask : desed_mask;
    switch (KindOf(e.source)) {
      case LabelKind::kStrong: {
        auto it = strong.find(e.clip_id);
        if (it == strong.end()) Fail(ErrorKind::kLabel, "clip {} ({}) has no strong labels", e.clip_id, SourceName(e.source));
        ex.strong = datasets::EncodeStrong(it->second, C);
        break;
      }
      case LabelKind::kWeak: {
        auto it = weak.find(e.clip_id);
        if (it == weak.end()) Fail(ErrorKind::kLabel, "clip {} (weak) has no weak labels", e.clip_id);
        ex.weak = datasets::EncodeWeak(it->second, C);
        break;
      }
      case LabelKind::kSoft: {
        auto s = SoftFor(soft, e.clip_id, C);
        if (!s) Fail(ErrorKind::kLabel, "clip {} (maestro_soft) has no soft labels", e.clip_id);
        ex.soft = std::move(s->segments);
        break;
      }
      case LabelKind::kNone: break;
    }
    ex.embeddings = LoadEmbeddings(d, mc, cfg.seed, e.clip_id);
    c.groups[static_cast<std::size_t>(*GroupOf(e.source))].push_back(c.examples.size());
    c.examples.push_back(std::move(ex));
  }
  return c;
}

/// Evaluation clips with whatever references are configured.
struct EvalSet {
  std::vector<std::string> clip_ids;
  std::vector<Tensor<float>> features;    // normalized [channels, frames, bins]
  std::vector<Tensor<float>> embeddings;  // [250, E] or empty
  std::map<std::string, datasets::StrongLabelSet> strong;
  std::map<std::string, datasets::SoftLabelSet> soft;
};

inline EvalSet LoadEvalSet(const std::vector<datasets::ManifestEntry>& manifest, const DataPaths& paths,
                           const model::ModelConfig& mc, const featurize::NormStats& stats, std::uint64_t seed) {
  EvalSet s;
  FeatureSource features(paths.features);
  for (const auto& e : manifest) {
    s.clip_ids.push_back(e.clip_id);
    s.features.push_back(Normalized(features.Raw(e), stats));
    CheckFeatureShape(s.features.back(), mc, e.clip_id);
    s.embeddings.push_back(LoadEmbeddings(paths, mc, seed, e.clip_id));
  }
  return s;
}

/// The configured validation manifest with its strong and soft references,
/// restricted to the listed clips.
inline EvalSet LoadValidation(const TrainConfig& cfg, const featurize::NormStats& stats,
                              const datasets::ClassMap& class_map) {
  const auto& d = cfg.data;
  if (d.validation_manifest.empty()) return {};
  EvalSet s = LoadEvalSet(datasets::ReadManifest(d.validation_manifest), d, cfg.model, stats, cfg.seed);
  if (!d.validation_strong.empty()) {
    const auto strong = datasets::ReadStrongTsv(d.validation_strong, class_map);
    for (const auto& id : s.clip_ids) {
      if (auto it = strong.find(id); it != strong.end()) s.strong[id] = it->second;
    }
  }
  if (!d.validation_soft.empty()) {
    const auto soft = datasets::ReadSoftTsv(d.validation_soft, class_map);
    for (const auto& id : s.clip_ids) {
      if (auto r = SoftFor(soft, id, class_map.size())) s.soft[id] = std::move(*r);
    }
  }
  return s;
}

}  // namespace sedkit::training
