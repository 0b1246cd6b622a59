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

#include <nlohmann/json.hpp>

#include "sedkit/common/binary_io.hpp"
#include "sedkit/common/checksum.hpp"
#include "sedkit/common/error.hpp"
#include "sedkit/datasets/batching.hpp"
#include "sedkit/model/config.hpp"
#include "sedkit/training/augment.hpp"
#include "sedkit/training/losses.hpp"
#include "sedkit/training/optim.hpp"

namespace sedkit::training {

/// Label and feature locations; relative paths resolve against the
/// config file's directory.
struct DataPaths {
  std::filesystem::path features;            // directory of <clip_id>.sedf
  std::filesystem::path stats;               // SEDN file, optional
  std::filesystem::path class_map;           // optional, default map otherwise
  std::vector<std::filesystem::path> strong_labels;
  std::filesystem::path weak_labels;
  std::filesystem::path soft_labels;
  std::filesystem::path embeddings;          // directory of <clip_id>.sede
  std::filesystem::path validation_manifest;
  std::filesystem::path validation_strong;
  std::filesystem::path validation_soft;
  std::filesystem::path out_dir = "checkpoints";
};

struct TrainConfig {
  model::ModelConfig model;
  double max_lr = 0.001;
  double rampup_epochs = 50.0;
  std::size_t epochs = 200;
  std::size_t steps_per_epoch = 0;  // 0: one pass over the largest source
  double ema_alpha = 0.999;
  AdamWConfig adam;
  double aux_w0 = 2.0;
  double aux_w1 = 0.5;
  double aux_decay_epochs = 50.0;
  double consistency_max = 2.0;
  datasets::BatchComposition batch;
  std::uint64_t seed = 42;
  AugmentConfig augment;
  LossWeights loss;
  bool validate = true;
  DataPaths data;

  void Validate() const {
    model.Validate();
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0.0)) Fail(ErrorKind::kConfig, "{} must be >= 0", name);
    };
    nonneg(max_lr, "max_lr");
    nonneg(rampup_epochs, "rampup_epochs");
    nonneg(adam.weight_decay, "weight_decay");
    nonneg(aux_w0, "aux_w0");
    nonneg(aux_w1, "aux_w1");
    nonneg(aux_decay_epochs, "aux_decay_epochs");
    nonneg(consistency_max, "consistency_max");
    nonneg(loss.strong, "loss_weights.strong");
    nonneg(loss.weak, "loss_weights.weak");
    nonneg(loss.soft, "loss_weights.soft");
    if (epochs > 0 && rampup_epochs > static_cast<double>(epochs)) {
      Fail(ErrorKind::kConfig, "rampup_epochs ({}) exceeds epochs ({})", rampup_epochs, epochs);
    }
    if (!(ema_alpha >= 0.0 && ema_alpha <= 1.0)) Fail(ErrorKind::kConfig, "ema_alpha must be in [0, 1]");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
      Fail(ErrorKind::kConfig, "adam betas must be in [0, 1)");
    }
    if (batch.total() == 0) Fail(ErrorKind::kConfig, "batch composition is empty");
    if (augment.max_time_shift < 0 || augment.max_freq_shift < 0 || augment.max_time_mask < 0) {
      Fail(ErrorKind::kConfig, "augmentation ranges must be >= 0");
    }
    if (augment.filter_min_knots < 2 || augment.filter_max_knots < augment.filter_min_knots) {
      Fail(ErrorKind::kConfig, "filter knots need 2 <= min <= max");
    }
    if (!(augment.mixup_alpha > 0.0)) Fail(ErrorKind::kConfig, "mixup_alpha must be positive");
  }
};

namespace detail {

using nlohmann::json;

/// Reads known keys and rejects the rest so typos surface.
class KeyReader {
 public:
  KeyReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) Fail(ErrorKind::kConfig, "{}: expected an object", where_);
  }

  template <typename V>
  void Get(const char* key, V& out) {
    seen_.push_back(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<V>();
    } catch (const json::exception& e) {
      Fail(ErrorKind::kConfig, "{}.{}: {}", where_, key, e.what());
    }
  }

  const json* Child(const char* key) {
    seen_.push_back(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void Finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
        Fail(ErrorKind::kConfig, "{}: unknown key \"{}\"", where_, it.key());
      }
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::vector<std::string> seen_;
};

}  // namespace detail

/// Parses the JSON training config. base_dir anchors relative data paths.
inline TrainConfig ParseTrainConfig(std::string_view text, const std::filesystem::path& base_dir,
                                    const std::string& source) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, "{}: {}", source, e.what());
  }
  TrainConfig c;
  detail::KeyReader r(root, source);
  r.Get("max_lr", c.max_lr);
  r.Get("rampup_epochs", c.rampup_epochs);
  r.Get("epochs", c.epochs);
  r.Get("steps_per_epoch", c.steps_per_epoch);
  r.Get("ema_alpha", c.ema_alpha);
  r.Get("weight_decay", c.adam.weight_decay);
  r.Get("adam_beta1", c.adam.beta1);
  r.Get("adam_beta2", c.adam.beta2);
  r.Get("adam_eps", c.adam.eps);
  r.Get("aux_w0", c.aux_w0);
  r.Get("aux_w1", c.aux_w1);
  r.Get("aux_decay_epochs", c.aux_decay_epochs);
  r.Get("consistency_max", c.consistency_max);
  r.Get("seed", c.seed);
  r.Get("validate", c.validate);
  if (const json* b = r.Child("batch_composition")) {
    detail::KeyReader br(*b, source + ".batch_composition");
    br.Get("weak", c.batch.quota[0]);
    br.Get("unlabeled", c.batch.quota[1]);
    br.Get("strong", c.batch.quota[2]);
    br.Get("maestro_soft", c.batch.quota[3]);
    br.Finish();
  }
  if (const json* a = r.Child("augment")) {
    detail::KeyReader ar(*a, source + ".augment");
    auto& g = c.augment;
    ar.Get("time_shift", g.time_shift);
    ar.Get("max_time_shift", g.max_time_shift);
    ar.Get("freq_shift", g.freq_shift);
    ar.Get("max_freq_shift", g.max_freq_shift);
    ar.Get("time_mask", g.time_mask);
    ar.Get("max_time_mask", g.max_time_mask);
    ar.Get("mixup", g.mixup);
    ar.Get("mixup_alpha", g.mixup_alpha);
    ar.Get("mixup_prob", g.mixup_prob);
    ar.Get("filter", g.filter);
    ar.Get("filter_min_knots", g.filter_min_knots);
    ar.Get("filter_max_knots", g.filter_max_knots);
    ar.Get("filter_db", g.filter_db);
    ar.Finish();
  }
  if (const json* l = r.Child("loss_weights")) {
    detail::KeyReader lr(*l, source + ".loss_weights");
    lr.Get("strong", c.loss.strong);
    lr.Get("weak", c.loss.weak);
    lr.Get("soft", c.loss.soft);
    lr.Finish();
  }
  if (const json* m = r.Child("model")) {
    detail::KeyReader mr(*m, source + ".model");
    auto& g = c.model;
    mr.Get("n_classes", g.n_classes);
    mr.Get("in_channels", g.in_channels);
    mr.Get("n_bins", g.n_bins);
    mr.Get("conv_channels", g.conv_channels);
    mr.Get("time_pool", g.time_pool);
    mr.Get("freq_pool", g.freq_pool);
    mr.Get("fdy_basis", g.fdy_basis);
    mr.Get("fdy_temperature", g.fdy_temperature);
    mr.Get("lka_dw_kernel", g.lka_dw_kernel);
    mr.Get("lka_dilated_kernel", g.lka_dilated_kernel);
    mr.Get("lka_dilation", g.lka_dilation);
    mr.Get("rnn_hidden", g.rnn_hidden);
    mr.Get("dropout", g.dropout);
    mr.Get("embedding_dim", g.embedding_dim);
    mr.Finish();
  }
  if (const json* d = r.Child("data")) {
    detail::KeyReader dr(*d, source + ".data");
    auto path = [&](const char* key, std::filesystem::path& out) {
      std::string s;
      dr.Get(key, s);
      if (!s.empty()) out = base_dir / s;
    };
    path("features", c.data.features);
    path("stats", c.data.stats);
    path("class_map", c.data.class_map);
    std::vector<std::string> strong;
    dr.Get("strong_labels", strong);
    for (const auto& s : strong) c.data.strong_labels.push_back(base_dir / s);
    path("weak_labels", c.data.weak_labels);
    path("soft_labels", c.data.soft_labels);
    path("embeddings", c.data.embeddings);
    path("validation_manifest", c.data.validation_manifest);
    path("validation_strong", c.data.validation_strong);
    path("validation_soft", c.data.validation_soft);
    c.data.out_dir = base_dir / "checkpoints";
    path("out_dir", c.data.out_dir);
    dr.Finish();
  } else {
    c.data.out_dir = base_dir / "checkpoints";
  }
  r.Finish();
  try {
    c.Validate();
  } catch (const Error& e) {
    Fail(ErrorKind::kConfig, "{}: {}", source, e.message());
  }
  return c;
}

/// The effective configuration as JSON, with every key ParseTrainConfig
/// reads. Paths are written as given.
inline nlohmann::ordered_json TrainConfigJson(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["max_lr"] = c.max_lr;
  j["rampup_epochs"] = c.rampup_epochs;
  j["epochs"] = c.epochs;
  j["steps_per_epoch"] = c.steps_per_epoch;
  j["ema_alpha"] = c.ema_alpha;
  j["weight_decay"] = c.adam.weight_decay;
  j["adam_beta1"] = c.adam.beta1;
  j["adam_beta2"] = c.adam.beta2;
  j["adam_eps"] = c.adam.eps;
  j["aux_w0"] = c.aux_w0;
  j["aux_w1"] = c.aux_w1;
  j["aux_decay_epochs"] = c.aux_decay_epochs;
  j["consistency_max"] = c.consistency_max;
  j["seed"] = c.seed;
  j["validate"] = c.validate;
  j["batch_composition"] = {{"weak", c.batch.quota[0]},
                            {"unlabeled", c.batch.quota[1]},
                            {"strong", c.batch.quota[2]},
                            {"maestro_soft", c.batch.quota[3]}};
  const auto& g = c.augment;
  j["augment"] = {{"time_shift", g.time_shift},       {"max_time_shift", g.max_time_shift},
                  {"freq_shift", g.freq_shift},       {"max_freq_shift", g.max_freq_shift},
                  {"time_mask", g.time_mask},         {"max_time_mask", g.max_time_mask},
                  {"mixup", g.mixup},                 {"mixup_alpha", g.mixup_alpha},
                  {"mixup_prob", g.mixup_prob},       {"filter", g.filter},
                  {"filter_min_knots", g.filter_min_knots}, {"filter_max_knots", g.filter_max_knots},
                  {"filter_db", g.filter_db}};
  j["loss_weights"] = {{"strong", c.loss.strong}, {"weak", c.loss.weak}, {"soft", c.loss.soft}};
  const auto& m = c.model;
  j["model"] = {{"n_classes", m.n_classes},
                {"in_channels", m.in_channels},
                {"n_bins", m.n_bins},
                {"conv_channels", m.conv_channels},
                {"time_pool", m.time_pool},
                {"freq_pool", m.freq_pool},
                {"fdy_basis", m.fdy_basis},
                {"fdy_temperature", m.fdy_temperature},
                {"lka_dw_kernel", m.lka_dw_kernel},
                {"lka_dilated_kernel", m.lka_dilated_kernel},
                {"lka_dilation", m.lka_dilation},
                {"rnn_hidden", m.rnn_hidden},
                {"dropout", m.dropout},
                {"embedding_dim", m.embedding_dim}};
  const auto& d = c.data;
  std::vector<std::string> strong;
  for (const auto& p : d.strong_labels) strong.push_back(p.string());
  j["data"] = {{"features", d.features.string()},
               {"stats", d.stats.string()},
               {"class_map", d.class_map.string()},
               {"strong_labels", strong},
               {"weak_labels", d.weak_labels.string()},
               {"soft_labels", d.soft_labels.string()},
               {"embeddings", d.embeddings.string()},
               {"validation_manifest", d.validation_manifest.string()},
               {"validation_strong", d.validation_strong.string()},
               {"validation_soft", d.validation_soft.string()},
               {"out_dir", d.out_dir.string()}};
  return j;
}

inline TrainConfig ReadTrainConfig(const std::filesystem::path& path) {
  return ParseTrainConfig(ReadTextFile(path), path.parent_path(), path.string());
}

}  // namespace sedkit::training
