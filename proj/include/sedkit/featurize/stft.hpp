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
#include <complex>
#include <span>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/tensor.hpp"
#include "sedkit/featurize/fft.hpp"

namespace sedkit::featurize {

struct StftConfig {
  std::size_t n_fft = 2048;
  std::size_t win_length = 2048;
  std::size_t hop_length = 160;
};

/// Number of centered analysis frames for a signal of n samples.
inline std::size_t StftFrameCount(std::size_t n_samples, std::size_t hop) {
  return n_samples / hop + 1;
}

/// Periodic Hann window.
inline std::vector<double> HannWindow(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t i = 0; i < length; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                static_cast<double>(length));
  }
  return w;
}

/// Index into a reflect-padded signal (no edge repetition).
inline std::size_t ReflectIndex(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  if (i >= n) i = period - i;
  return static_cast<std::size_t>(i);
}

/// Power spectrogram |X|^2 of a centered, reflect-padded, Hann-windowed
/// analysis. Output shape frames x (n_fft/2 + 1).
class PowerStft {
 public:
  explicit PowerStft(StftConfig config = {})
      : config_(config), fft_(config.n_fft), window_(HannWindow(config.win_length)) {
    if (config.win_length != config.n_fft) {
      Fail(ErrorKind::kParameter, "window length must equal FFT size");
    }
  }

  const StftConfig& config() const { return config_; }
  std::size_t bins() const { return config_.n_fft / 2 + 1; }

  /// Complex spectrum, frames x bins.
  std::vector<std::vector<std::complex<double>>> Complex(
      std::span<const float> samples) const {
    if (samples.empty()) Fail(ErrorKind::kShape, "STFT of an empty signal");
    const std::size_t frames = StftFrameCount(samples.size(), config_.hop_length);
    const auto n = static_cast<std::int64_t>(samples.size());
    const auto half = static_cast<std::int64_t>(config_.n_fft / 2);
    std::vector<std::vector<std::complex<double>>> out(frames);
    std::vector<std::complex<double>> buf(config_.n_fft);
    for (std::size_t t = 0; t < frames; ++t) {
      const std::int64_t start = static_cast<std::int64_t>(t * config_.hop_length) - half;
      for (std::size_t i = 0; i < config_.n_fft; ++i) {
        const std::int64_t idx = start + static_cast<std::int64_t>(i);
        const double v = (idx >= 0 && idx < n)
                             ? samples[static_cast<std::size_t>(idx)]
                             : samples[ReflectIndex(idx, n)];
        buf[i] = {v * window_[i], 0.0};
      }
      fft_.Forward(buf);
      out[t].assign(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(bins()));
    }
    return out;
  }

  Tensor<double> Power(std::span<const float> samples) const {
    auto spec = Complex(samples);
    Tensor<double> out({spec.size(), bins()});
    for (std::size_t t = 0; t < spec.size(); ++t) {
      for (std::size_t k = 0; k < bins(); ++k) out.at(t, k) = std::norm(spec[t][k]);
    }
    return out;
  }

 private:
  StftConfig config_;
  Fft fft_;
  std::vector<double> window_;
};

}  // namespace sedkit::featurize
