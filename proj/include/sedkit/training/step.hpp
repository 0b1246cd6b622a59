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

#include "sedkit/common/error.hpp"
#include "sedkit/common/random.hpp"
#include "sedkit/model/crnn.hpp"
#include "sedkit/model/parameters.hpp"
#include "sedkit/training/augment.hpp"
#include "sedkit/training/config.hpp"
#include "sedkit/training/losses.hpp"
#include "sedkit/training/optim.hpp"
#include "sedkit/training/schedules.hpp"

namespace sedkit::training {

template <typename T>
struct TrainState {
  model::ParameterSet<T> student;
  model::ParameterSet<T> teacher;
  model::ParameterSet<T> adam_m;  // trainable student tensors only
  model::ParameterSet<T> adam_v;
  std::uint64_t step = 0;
};

template <typename T>
TrainState<T> InitTrainState(const model::ModelConfig& cfg, std::uint64_t seed) {
  TrainState<T> st;
  st.student = model::InitParams<T>(cfg, seed);
  st.teacher = st.student;
  st.adam_m = MomentsLike(st.student);
  st.adam_v = MomentsLike(st.student);
  return st;
}

/// Fractional epoch of a step count.
inline double EpochOf(std::uint64_t step, std::size_t steps_per_epoch) {
  return steps_per_epoch == 0 ? 0.0 : static_cast<double>(step) / static_cast<double>(steps_per_epoch);
}

inline std::uint64_t DropoutSeed(std::uint64_t seed, std::uint64_t step, std::uint64_t view) {
  Rng rng = DeriveRng(seed, {0x57e9u, step, view});
  return rng();
}

/// One optimizer step: student and teacher forward passes, losses, AdamW on
/// the student, running-statistics update, then the teacher EMA.
template <typename T>
LossBreakdown TrainStep(const TrainConfig& cfg, TrainState<T>& st, const StepBatch<T>& batch, double epoch) {
  const auto& mc = cfg.model;
  const Tensor<T>* emb = batch.embeddings.empty() ? nullptr : &batch.embeddings;
  model::Tape<T> tape;
  const auto student = model::ModelForward(mc, st.student, batch.student, emb,
                                           {model::Mode::kTrain, DropoutSeed(cfg.seed, st.step, 0), true}, &tape);
  const auto teacher = model::ModelForward(mc, st.teacher, batch.teacher, emb,
                                           {model::Mode::kTrain, DropoutSeed(cfg.seed, st.step, 1), false});
  const double lr = LearningRate(epoch, cfg.max_lr, cfg.rampup_epochs);
  const double w_cons = ConsistencyWeight(epoch, cfg.consistency_max, cfg.rampup_epochs);
  const double w_aux = AuxWeight(epoch, cfg.aux_w0, cfg.aux_w1, cfg.aux_decay_epochs);
  auto res = ComputeLosses(student, &teacher.main, batch.targets, cfg.loss, w_cons, w_aux);
  if (const auto bad = NonFiniteTerm(res.loss); !bad.empty()) {
    Fail(ErrorKind::kNumeric, "non-finite {} loss at step {}", bad, st.step);
  }
  const auto grads = model::ModelBackward(mc, st.student, tape, res.main, &res.aux);
  ++st.step;
  AdamWStep(st.student, grads, st.adam_m, st.adam_v, st.step, lr, cfg.adam);
  model::UpdateRunningStats(mc, st.student, tape);
  EmaUpdate(st.teacher, st.student, cfg.ema_alpha);
  return res.loss;
}

}  // namespace sedkit::training
