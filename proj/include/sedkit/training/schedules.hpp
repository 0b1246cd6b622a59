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

namespace sedkit::training {

/// exp(-5 (1 - min(epoch / rampup, 1))^2); 1 when rampup is 0.
inline double RampUp(double epoch, double rampup_epochs) {
  if (rampup_epochs <= 0.0) return 1.0;
  const double p = 1.0 - std::min(std::max(epoch, 0.0) / rampup_epochs, 1.0);
  return std::exp(-5.0 * p * p);
}

inline double LearningRate(double epoch, double max_lr = 0.001, double rampup_epochs = 50.0) {
  return max_lr * RampUp(epoch, rampup_epochs);
}

inline double ConsistencyWeight(double epoch, double max_weight = 2.0, double rampup_epochs = 50.0) {
  return max_weight * RampUp(epoch, rampup_epochs);
}

/// Linear from w0 at epoch 0 to w1 at decay_epochs, constant afterwards.
inline double AuxWeight(double epoch, double w0 = 2.0, double w1 = 0.5, double decay_epochs = 50.0) {
  if (decay_epochs <= 0.0 || epoch >= decay_epochs) return w1;
  const double e = std::max(epoch, 0.0);
  return w0 + (w1 - w0) * (e / decay_epochs);
}

}  // namespace sedkit::training
