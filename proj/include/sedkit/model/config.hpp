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

#include <cstddef>
#include <numeric>
#include <vector>

#include "sedkit/common/error.hpp"

namespace sedkit::model {

struct ModelConfig {
  std::size_t n_classes = 25;
  std::size_t in_channels = 3;
  std::size_t n_bins = 128;
  std::vector<std::size_t> conv_channels = {16, 32, 64, 128, 128, 128, 128};
  std::vector<std::size_t> time_pool = {2, 2, 1, 1, 1, 1, 1};
  std::vector<std::size_t> freq_pool = {2, 2, 2, 2, 2, 2, 2};
  std::size_t fdy_basis = 4;
  double fdy_temperature = 31.0;
  std::size_t lka_dw_kernel = 5;
  std::size_t lka_dilated_kernel = 7;
  std::size_t lka_dilation = 3;
  std::size_t rnn_hidden = 192;
  double dropout = 0.5;
  std::size_t embedding_dim = 0;

  std::size_t n_blocks() const { return conv_channels.size(); }
  std::size_t conv_out_dim() const { return conv_channels.back(); }
  std::size_t time_reduction() const {
    return std::accumulate(time_pool.begin(), time_pool.end(), std::size_t{1}, std::multiplies<>());
  }
  std::size_t freq_reduction() const {
    return std::accumulate(freq_pool.begin(), freq_pool.end(), std::size_t{1}, std::multiplies<>());
  }
  /// Input frames actually used: the tail beyond a multiple of the time
  /// reduction is dropped (1001 -> 1000 for the default config).
  std::size_t UsedFrames(std::size_t input_frames) const {
    return input_frames - input_frames % time_reduction();
  }
  std::size_t OutputFrames(std::size_t input_frames) const {
    return UsedFrames(input_frames) / time_reduction();
  }

  void Validate() const {
    if (n_classes == 0) Fail(ErrorKind::kConfig, "n_classes must be positive");
    if (in_channels == 0 || n_bins == 0) Fail(ErrorKind::kConfig, "input shape must be positive");
    if (conv_channels.empty()) Fail(ErrorKind::kConfig, "need at least one conv block");
    if (time_pool.size() != conv_channels.size() || freq_pool.size() != conv_channels.size()) {
      Fail(ErrorKind::kConfig, "conv_channels, time_pool and freq_pool need equal lengths");
    }
    for (std::size_t i = 0; i < n_blocks(); ++i) {
      if (conv_channels[i] == 0 || time_pool[i] == 0 || freq_pool[i] == 0) {
        Fail(ErrorKind::kConfig, "block {} has a zero size", i);
      }
    }
    if (freq_reduction() != n_bins) {
      Fail(ErrorKind::kConfig, "product of freq_pool ({}) must equal n_bins ({})", freq_reduction(),
           n_bins);
    }
    if (fdy_basis == 0) Fail(ErrorKind::kConfig, "fdy_basis must be positive");
    if (!(fdy_temperature > 0.0)) Fail(ErrorKind::kConfig, "fdy_temperature must be positive");
    if (lka_dw_kernel % 2 == 0 || lka_dilated_kernel % 2 == 0 || lka_dilation == 0) {
      Fail(ErrorKind::kConfig, "LKA kernels must be odd and dilation positive");
    }
    if (rnn_hidden == 0) Fail(ErrorKind::kConfig, "rnn_hidden must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) Fail(ErrorKind::kConfig, "dropout must be in [0, 1)");
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace sedkit::model
