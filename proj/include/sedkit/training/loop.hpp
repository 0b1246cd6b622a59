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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "sedkit/common/error.hpp"
#include "sedkit/datasets/batching.hpp"
#include "sedkit/datasets/labels.hpp"
#include "sedkit/evaluate/pauc.hpp"
#include "sedkit/evaluate/postprocess.hpp"
#include "sedkit/evaluate/predict.hpp"
#include "sedkit/evaluate/psds.hpp"
#include "sedkit/model/checkpoint.hpp"
#include "sedkit/training/data.hpp"
#include "sedkit/training/step.hpp"

namespace sedkit::training {

/// Validation scores in checkpoint metadata, in this order.
enum ScoreSlot : std::size_t { kStudentPsds = 0, kStudentMpauc = 1, kTeacherPsds = 2, kTeacherMpauc = 3 };

inline std::string CheckpointName(std::size_t epoch) { return fmt::format("ckpt_epoch{:03d}.sedm", epoch); }

inline model::Checkpoint MakeCheckpoint(const model::ModelConfig& mc, const TrainState<float>& st,
                                        std::optional<model::CheckpointMeta> meta) {
  model::Checkpoint ck;
  ck.config = mc;
  ck.AddGroup("student", st.student);
  ck.AddGroup("teacher", st.teacher);
  ck.AddGroup("adam_m", st.adam_m);
  ck.AddGroup("adam_v", st.adam_v);
  ck.meta = std::move(meta);
  return ck;
}

inline TrainState<float> StateFromCheckpoint(const model::Checkpoint& ck) {
  if (!ck.meta) Fail(ErrorKind::kState, "checkpoint has no training metadata");
  TrainState<float> st;
  st.student = ck.Group("student");
  st.teacher = ck.Group("teacher");
  st.adam_m = ck.Group("adam_m", true);
  st.adam_v = ck.Group("adam_v", true);
  st.step = ck.meta->step;
  return st;
}

struct ValidationScores {
  double psds = 0;
  double mpauc = 0;
};

/// Median-filtered PSDS on strong references and mpauc on soft references
/// (MAESTRO-visible classes). A metric without usable references scores 0.
inline ValidationScores Validate(const model::ModelConfig& mc, const model::ParameterSet<float>& params,
                                 const EvalSet& set, const datasets::ClassMap& class_map) {
  const auto records = evaluate::PredictScores(mc, params, set.clip_ids, set.features, set.embeddings);
  std::map<std::string, Tensor<float>> raw, filtered;
  for (const auto& r : records) {
    raw[r.clip_id] = r.scores;
    filtered[r.clip_id] = evaluate::MedianFilter(r.scores, evaluate::kDefaultMedianWindow);
  }
  ValidationScores v;
  std::size_t n_events = 0;
  for (const auto& [_, s] : set.strong) n_events += s.events.size();
  if (n_events > 0) v.psds = evaluate::Psds(filtered, set.strong).psds;
  if (!set.soft.empty()) {
    std::vector<std::size_t> classes;
    const auto mask = class_map.Mask(datasets::Vocabulary::kMaestro);
    for (std::size_t c = 0; c < mask.size(); ++c) {
      if (mask[c]) classes.push_back(c);
    }
    try {
      v.mpauc = evaluate::Mpauc(raw, set.soft, classes).mpauc;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kMetric) throw;
    }
  }
  return v;
}

struct EpochReport {
  std::size_t epoch = 0;
  std::uint64_t step = 0;
  LossBreakdown mean_loss;
  std::vector<double> scores;
  std::filesystem::path checkpoint;
};

struct LoopOptions {
  std::filesystem::path resume;           // checkpoint to continue from
  std::optional<std::size_t> stop_after;  // last epoch to run in this call
  std::function<void(const std::string&)> log;
  std::function<void(const EpochReport&)> on_epoch;
};

inline LossBreakdown& operator+=(LossBreakdown& a, const LossBreakdown& b) {
  a.strong_bce += b.strong_bce;
  a.weak_bce += b.weak_bce;
  a.soft_mpa_bce += b.soft_mpa_bce;
  a.consistency += b.consistency;
  a.aux_strong_bce += b.aux_strong_bce;
  a.aux_weak_bce += b.aux_weak_bce;
  a.aux_soft_mpa_bce += b.aux_soft_mpa_bce;
  a.consistency_weight += b.consistency_weight;
  a.aux_weight += b.aux_weight;
  a.total += b.total;
  return a;
}

inline LossBreakdown Scaled(LossBreakdown a, double s) {
  for (double* p : {&a.strong_bce, &a.weak_bce, &a.soft_mpa_bce, &a.consistency, &a.aux_strong_bce,
                    &a.aux_weak_bce, &a.aux_soft_mpa_bce, &a.consistency_weight, &a.aux_weight, &a.total})
    *p *= s;
  return a;
}

/// Runs training over an already loaded corpus. Writes ckpt_epoch000 for
/// the initial state (unless resuming) and one checkpoint per epoch after.
/// Batches and augmentation derive from (seed, step) so a resumed run
/// replays the uninterrupted one.
inline std::vector<EpochReport> TrainLoop(const TrainConfig& cfg, const Corpus& corpus, const EvalSet* validation,
                                          const LoopOptions& opts = {}) {
  auto log = [&](const std::string& s) {
    if (opts.log) opts.log(s);
  };
  const auto& mc = cfg.model;
  datasets::BatchStream stream(corpus.group_sizes(), cfg.batch, cfg.seed);
  const std::size_t spe = cfg.steps_per_epoch > 0 ? cfg.steps_per_epoch : stream.batches_per_epoch();
  AugmentConfig aug = cfg.augment;
  aug.logmel_scale.assign(aug.logmel_channels, 1.0);
  for (std::size_t c = 0; c < aug.logmel_channels && c < corpus.stats.channels(); ++c) {
    aug.logmel_scale[c] = 1.0 / corpus.stats.std[c];
  }
  std::filesystem::create_directories(cfg.data.out_dir);

  TrainState<float> st;
  std::size_t first_epoch = 1;
  std::vector<EpochReport> reports;
  auto save = [&](std::size_t epoch, std::vector<double> scores, const LossBreakdown& loss) {
    model::CheckpointMeta meta{static_cast<std::uint32_t>(epoch), st.step, cfg.seed, scores};
    const auto path = cfg.data.out_dir / CheckpointName(epoch);
    model::WriteCheckpoint(path, MakeCheckpoint(mc, st, meta));
    EpochReport r{epoch, st.step, loss, std::move(scores), path};
    if (opts.on_epoch) opts.on_epoch(r);
    reports.push_back(std::move(r));
  };
  auto validate = [&]() -> std::vector<double> {
    if (!cfg.validate || !validation || validation->clip_ids.empty()) return {};
    const auto s = Validate(mc, st.student, *validation, corpus.class_map);
    const auto t = Validate(mc, st.teacher, *validation, corpus.class_map);
    return {s.psds, s.mpauc, t.psds, t.mpauc};
  };

  if (!opts.resume.empty()) {
    const auto ck = model::ReadCheckpoint(opts.resume);
    if (!(ck.config == mc)) Fail(ErrorKind::kConfig, "{}: model configuration differs from the training config", opts.resume.string());
    st = StateFromCheckpoint(ck);
    if (ck.meta->seed != cfg.seed) {
      Fail(ErrorKind::kConfig, "{}: written with seed {}, config has {}", opts.resume.string(), ck.meta->seed, cfg.seed);
    }
    first_epoch = ck.meta->epoch + 1;
    if (st.step != static_cast<std::uint64_t>(ck.meta->epoch) * spe) {
      Fail(ErrorKind::kState, "{}: step {} is not the end of epoch {}", opts.resume.string(), st.step, ck.meta->epoch);
    }
    stream.Skip(st.step);
    log(fmt::format("resumed from {} at epoch {}, step {}", opts.resume.string(), ck.meta->epoch, st.step));
  } else {
    st = InitTrainState<float>(mc, cfg.seed);
    save(0, validate(), {});
  }

  const std::size_t last = opts.stop_after ? std::min(cfg.epochs, *opts.stop_after) : cfg.epochs;
  for (std::size_t epoch = first_epoch; epoch <= last; ++epoch) {
    LossBreakdown sum;
    for (std::size_t i = 0; i < spe; ++i) {
      std::vector<const TrainingExample*> items;
      for (const auto& it : stream.Next()) items.push_back(&corpus.at(it));
      const auto batch = BuildStepBatch<float>(items, aug, mc.n_classes, cfg.seed, st.step);
      sum += TrainStep(cfg, st, batch, EpochOf(st.step, spe));
    }
    const auto mean = Scaled(sum, 1.0 / static_cast<double>(spe));
    auto scores = validate();
    std::string msg = fmt::format("epoch {} step {} loss {:.5f}", epoch, st.step, mean.total);
    if (scores.size() == 4) {
      msg += fmt::format(" | student psds {:.4f} mpauc {:.4f} | teacher psds {:.4f} mpauc {:.4f}", scores[0],
                         scores[1], scores[2], scores[3]);
    }
    log(msg);
    save(epoch, std::move(scores), mean);
  }
  return reports;
}

}  // namespace sedkit::training
