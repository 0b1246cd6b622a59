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
#include <string>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/tensor.hpp"

namespace sedkit::featurize {

enum class MelScale { kSlaney, kHtk };

inline const char* MelScaleName(MelScale s) {
  return s == MelScale::kSlaney ? "slaney-mel" : "htk-mel";
}

inline double HzToMel(double hz, MelScale scale) {
  if (scale == MelScale::kHtk) return 2595.0 * std::log10(1.0 + hz / 700.0);
  // Slaney: linear below 1 kHz, logarithmic above.
  constexpr double kFSp = 200.0 / 3.0;
  constexpr double kMinLogHz = 1000.0;
  constexpr double kMinLogMel = kMinLogHz / kFSp;
  const double logstep = std::log(6.4) / 27.0;
  if (hz < kMinLogHz) return hz / kFSp;
  return kMinLogMel + std::log(hz / kMinLogHz) / logstep;
}

inline double MelToHz(double mel, MelScale scale) {
  if (scale == MelScale::kHtk) return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
  constexpr double kFSp = 200.0 / 3.0;
  constexpr double kMinLogHz = 1000.0;
  constexpr double kMinLogMel = kMinLogHz / kFSp;
  const double logstep = std::log(6.4) / 27.0;
  if (mel < kMinLogMel) return mel * kFSp;
  return kMinLogHz * std::exp(logstep * (mel - kMinLogMel));
}

struct MelBank {
  std::size_t n_filters = 0;
  std::size_t n_fft_bins = 0;
  MelScale scale = MelScale::kSlaney;
  double f_min = 0.0;
  double f_max = 0.0;
  std::vector<double> breakpoints_hz;  // n_filters + 2 edges/centers
  Tensor<double> weights;              // n_filters x n_fft_bins
};

struct MelBankConfig {
  MelScale scale = MelScale::kSlaney;
  double f_min = 0.0;
  double f_max = 8000.0;
  std::size_t n_filters = 128;
  std::size_t n_fft = 2048;
  double sample_rate = 16000.0;
};

/// Triangular filters with peaks of 1 whose breakpoints are equally spaced
/// on the chosen mel scale (no area normalization).
inline MelBank BuildMelBank(const MelBankConfig& cfg) {
  if (!(cfg.f_min >= 0.0) || !(cfg.f_min < cfg.f_max) ||
      cfg.f_max > cfg.sample_rate / 2.0) {
    Fail(ErrorKind::kParameter,
         "mel bank needs 0 <= f_min < f_max <= {} (got {} .. {})",
         cfg.sample_rate / 2.0, cfg.f_min, cfg.f_max);
  }
  if (cfg.n_filters == 0) Fail(ErrorKind::kParameter, "mel bank needs filters");
  MelBank bank;
  bank.n_filters = cfg.n_filters;
  bank.n_fft_bins = cfg.n_fft / 2 + 1;
  bank.scale = cfg.scale;
  bank.f_min = cfg.f_min;
  bank.f_max = cfg.f_max;

  const double mel_lo = HzToMel(cfg.f_min, cfg.scale);
  const double mel_hi = HzToMel(cfg.f_max, cfg.scale);
  const std::size_t n_points = cfg.n_filters + 2;
  bank.breakpoints_hz.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double m = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                  static_cast<double>(n_points - 1);
    bank.breakpoints_hz[i] = MelToHz(m, cfg.scale);
  }

  bank.weights = Tensor<double>({cfg.n_filters, bank.n_fft_bins});
  const double bin_hz = cfg.sample_rate / static_cast<double>(cfg.n_fft);
  const auto& f = bank.breakpoints_hz;
  for (std::size_t m = 0; m < cfg.n_filters; ++m) {
    const double lo = f[m], center = f[m + 1], hi = f[m + 2];
    for (std::size_t k = 0; k < bank.n_fft_bins; ++k) {
      const double hz = static_cast<double>(k) * bin_hz;
      const double rising = (hz - lo) / (center - lo);
      const double falling = (hi - hz) / (hi - center);
      bank.weights.at(m, k) = std::max(0.0, std::min(rising, falling));
    }
  }
  for (std::size_t m = 0; m < cfg.n_filters; ++m) {
    bool any = false;
    for (std::size_t k = 0; k < bank.n_fft_bins && !any; ++k) {
      any = bank.weights.at(m, k) > 0.0;
    }
    if (!any) {
      Fail(ErrorKind::kParameter,
           "mel filter {} covers no FFT bin; too many filters for this FFT", m);
    }
  }
  return bank;
}

}  // namespace sedkit::featurize
