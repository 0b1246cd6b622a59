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
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/tensor.hpp"
#include "sedkit/featurize/mel.hpp"
#include "sedkit/featurize/resample.hpp"
#include "sedkit/featurize/stft.hpp"
#include "sedkit/featurize/wav.hpp"

namespace sedkit::featurize {

inline constexpr int kTargetSampleRate = 16000;
inline constexpr double kLogFloor = 1e-6;
inline constexpr double kPreEmphasis = 0.97;
inline constexpr std::size_t kFeatureChannels = 3;

struct AudioClip {
  std::vector<float> samples;
  int sample_rate = kTargetSampleRate;
  std::string source_path;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Mono mixdown (stereo averaged) and resampling to 16 kHz. The clip keeps
/// its natural length; use FixLength for batching.
inline AudioClip ToClip(const WavData& wav, const std::string& source_path) {
  std::vector<float> mono(wav.channel_samples.empty() ? 0
                                                      : wav.channel_samples[0].size());
  for (std::size_t i = 0; i < mono.size(); ++i) {
    double acc = 0.0;
    for (const auto& ch : wav.channel_samples) acc += ch[i];
    mono[i] = static_cast<float>(acc / static_cast<double>(wav.channels));
  }
  AudioClip clip;
  clip.samples = Resample(mono, wav.sample_rate, kTargetSampleRate);
  clip.sample_rate = kTargetSampleRate;
  clip.source_path = source_path;
  return clip;
}

inline AudioClip LoadWav(const std::filesystem::path& path) {
  return ToClip(ReadWav(path), path.string());
}

/// Right-pads with zeros or truncates the tail to exactly n samples.
inline AudioClip FixLength(AudioClip clip, std::size_t n) {
  clip.samples.resize(n, 0.0f);
  return clip;
}

enum class LogMelVariant { kStandard, kSpeechStyle };

struct FeatureConfig {
  double clip_seconds = 10.0;
  StftConfig stft{};
  std::size_t n_mels = 128;
  double f_min = 0.0;
  double f_max = 8000.0;

  std::size_t ExpectedSamples() const {
    return static_cast<std::size_t>(std::llround(clip_seconds * kTargetSampleRate));
  }
  std::size_t ExpectedFrames() const {
    return StftFrameCount(ExpectedSamples(), stft.hop_length);
  }
};

/// 3 x frames x bins. Channel 0: standard logmel, 1: speech-style logmel,
/// 2: MFCC (DCT-II) of channel 0.
struct FeatureTensor {
  static constexpr std::array<const char*, kFeatureChannels> kChannelNames = {
      "logmel-standard", "logmel-speechstyle", "mfcc"};

  Tensor<float> data;
  bool normalized = false;

  std::size_t channels() const { return data.dim(0); }
  std::size_t frames() const { return data.dim(1); }
  std::size_t bins() const { return data.dim(2); }
};

inline std::vector<float> PreEmphasize(std::span<const float> x, double coeff) {
  std::vector<float> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    y[i] = static_cast<float>(static_cast<double>(x[i]) - coeff * x[i - 1]);
  }
  return y;
}

/// log(power x bank^T + floor). Shape frames x n_filters.
inline Tensor<double> LogMel(const Tensor<double>& power, const MelBank& bank) {
  if (power.rank() != 2 || power.dim(1) != bank.n_fft_bins) {
    Fail(ErrorKind::kShape, "spectrogram has {} bins, mel bank expects {}",
         power.rank() == 2 ? power.dim(1) : 0, bank.n_fft_bins);
  }
  const std::size_t frames = power.dim(0);
  const std::size_t bins = bank.n_fft_bins;
  // Nonzero support of each triangle, so the product skips empty columns.
  std::vector<std::pair<std::size_t, std::size_t>> support(bank.n_filters);
  for (std::size_t m = 0; m < bank.n_filters; ++m) {
    std::size_t lo = bins, hi = 0;
    for (std::size_t k = 0; k < bins; ++k) {
      if (bank.weights.at(m, k) > 0.0) {
        lo = std::min(lo, k);
        hi = k + 1;
      }
    }
    support[m] = {lo, std::max(lo, hi)};
  }
  Tensor<double> out({frames, bank.n_filters});
  for (std::size_t t = 0; t < frames; ++t) {
    const double* row = &power.at(t, 0);
    for (std::size_t m = 0; m < bank.n_filters; ++m) {
      const double* w = &bank.weights.at(m, 0);
      double acc = 0.0;
      for (std::size_t k = support[m].first; k < support[m].second; ++k) {
        acc += row[k] * w[k];
      }
      out.at(t, m) = std::log(acc + kLogFloor);
    }
  }
  return out;
}

/// Orthonormal DCT-II basis, n x n, row k = coefficient k.
inline Tensor<double> DctIIMatrix(std::size_t n) {
  Tensor<double> basis({n, n});
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd);
    for (std::size_t i = 0; i < n; ++i) {
      basis.at(k, i) =
          scale * std::cos(M_PI / nd * (static_cast<double>(i) + 0.5) *
                           static_cast<double>(k));
    }
  }
  return basis;
}

/// DCT-II along the last axis keeping every coefficient.
inline Tensor<double> Mfcc(const Tensor<double>& logmel) {
  if (logmel.rank() != 2) Fail(ErrorKind::kShape, "MFCC input must be a matrix");
  const std::size_t frames = logmel.dim(0), n = logmel.dim(1);
  const auto basis = DctIIMatrix(n);
  Tensor<double> out({frames, n});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += basis.at(k, i) * logmel.at(t, i);
      out.at(t, k) = acc;
    }
  }
  return out;
}

/// Inverse of Mfcc (DCT-III with the same orthonormal scaling).
inline Tensor<double> InverseMfcc(const Tensor<double>& coeffs) {
  const std::size_t frames = coeffs.dim(0), n = coeffs.dim(1);
  const auto basis = DctIIMatrix(n);
  Tensor<double> out({frames, n});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += basis.at(k, i) * coeffs.at(t, k);
      out.at(t, i) = acc;
    }
  }
  return out;
}

/// Owns the STFT plan and both mel banks; reusable across clips.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureConfig config = {})
      : config_(config),
        stft_(config.stft),
        standard_bank_(BuildMelBank({MelScale::kSlaney, config.f_min, config.f_max,
                                     config.n_mels, config.stft.n_fft,
                                     kTargetSampleRate})),
        speech_bank_(BuildMelBank({MelScale::kHtk, config.f_min, config.f_max,
                                   config.n_mels, config.stft.n_fft,
                                   kTargetSampleRate})) {}

  const FeatureConfig& config() const { return config_; }
  const MelBank& standard_bank() const { return standard_bank_; }
  const MelBank& speech_bank() const { return speech_bank_; }
  const PowerStft& stft() const { return stft_; }

  void CheckClip(const AudioClip& clip) const {
    if (clip.sample_rate != kTargetSampleRate) {
      Fail(ErrorKind::kShape, "clip {} is at {} Hz, expected {}", clip.source_path,
           clip.sample_rate, kTargetSampleRate);
    }
    if (clip.samples.size() != config_.ExpectedSamples()) {
      Fail(ErrorKind::kShape, "clip {} has {} samples, expected {}",
           clip.source_path, clip.samples.size(), config_.ExpectedSamples());
    }
  }

  Tensor<double> PowerSpectrogram(const AudioClip& clip) const {
    CheckClip(clip);
    return stft_.Power(clip.samples);
  }

  Tensor<double> LogMelOf(const AudioClip& clip, LogMelVariant variant) const {
    CheckClip(clip);
    if (variant == LogMelVariant::kStandard) {
      return LogMel(stft_.Power(clip.samples), standard_bank_);
    }
    const auto emphasized = PreEmphasize(clip.samples, kPreEmphasis);
    return LogMel(stft_.Power(emphasized), speech_bank_);
  }

  FeatureTensor Extract(const AudioClip& clip) const {
    const auto standard = LogMelOf(clip, LogMelVariant::kStandard);
    const auto speech = LogMelOf(clip, LogMelVariant::kSpeechStyle);
    const auto cepstra = Mfcc(standard);
    const std::size_t frames = standard.dim(0), bins = standard.dim(1);
    FeatureTensor out;
    out.data = Tensor<float>({kFeatureChannels, frames, bins});
    const Tensor<double>* channels[kFeatureChannels] = {&standard, &speech, &cepstra};
    for (std::size_t c = 0; c < kFeatureChannels; ++c) {
      for (std::size_t t = 0; t < frames; ++t) {
        for (std::size_t b = 0; b < bins; ++b) {
          out.data.at(c, t, b) = static_cast<float>(channels[c]->at(t, b));
        }
      }
    }
    return out;
  }

 private:
  FeatureConfig config_;
  PowerStft stft_;
  MelBank standard_bank_;
  MelBank speech_bank_;
};

}  // namespace sedkit::featurize
