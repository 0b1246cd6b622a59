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

#include <cmath>
#include <cstdint>

#include "sedkit/common/error.hpp"
#include "sedkit/model/parameters.hpp"

namespace sedkit::training {

/// teacher = alpha * teacher + (1 - alpha) * student for every tensor,
/// batch-norm statistics included.
template <typename T>
void EmaUpdate(model::ParameterSet<T>& teacher, const model::ParameterSet<T>& student, double alpha) {
  if (teacher.size() != student.size()) Fail(ErrorKind::kShape, "EMA: tensor counts differ");
  const T a = static_cast<T>(alpha), b = static_cast<T>(1.0 - alpha);
  for (std::size_t p = 0; p < teacher.size(); ++p) {
    auto& t = teacher[p];
    const auto& s = student[p];
    if (t.shape() != s.shape()) {
      Fail(ErrorKind::kShape, "EMA: {} has shape {} vs {}", teacher.entry(p).name, ShapeString(t.shape()),
           ShapeString(s.shape()));
    }
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = a * t[i] + b * s[i];
  }
}

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

/// First/second moments for the trainable tensors only.
template <typename T>
model::ParameterSet<T> MomentsLike(const model::ParameterSet<T>& params) {
  model::ParameterSet<T> out;
  for (const auto& e : params.entries()) {
    if (e.trainable) out.Add(e.name, Tensor<T>(e.value.shape()));
  }
  return out;
}

/// One AdamW update; step counts from 1. Weight decay shrinks the weights
/// before the moment-based step and never enters the moments.
template <typename T>
void AdamWStep(model::ParameterSet<T>& params, const model::ParameterSet<T>& grads, model::ParameterSet<T>& m,
               model::ParameterSet<T>& v, std::uint64_t step, double lr, const AdamWConfig& cfg) {
  if (step == 0) Fail(ErrorKind::kState, "AdamW step counter starts at 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  const T decay = static_cast<T>(1.0 - lr * cfg.weight_decay);
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  std::size_t k = 0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params.entry(p).trainable) continue;
    auto& w = params[p];
    const auto& g = grads[p];
    auto& mt = m[k];
    auto& vt = v[k];
    if (m.entry(k).name != params.entry(p).name) Fail(ErrorKind::kState, "moment layout mismatch at {}", params.entry(p).name);
    ++k;
    for (std::size_t i = 0; i < w.size(); ++i) {
      mt[i] = b1 * mt[i] + (T(1) - b1) * g[i];
      vt[i] = b2 * vt[i] + (T(1) - b2) * g[i] * g[i];
      const double mhat = static_cast<double>(mt[i]) / bc1;
      const double vhat = static_cast<double>(vt[i]) / bc2;
      w[i] *= decay;
      w[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
  }
}

}  // namespace sedkit::training
