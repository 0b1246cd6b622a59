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
#include <numeric>
#include <span>
#include <vector>

#include "sedkit/common/error.hpp"

namespace sedkit::featurize {

/// Rational-ratio polyphase resampler with a Kaiser-windowed sinc kernel.
/// Each output phase uses a fixed number of taps; the kernel is normalized
/// per phase so DC gain is exactly one.
class PolyphaseResampler {
 public:
  static constexpr int kTapsPerPhase = 64;
  static constexpr double kKaiserBeta = 14.0;
  static constexpr double kRolloff = 0.94;

  PolyphaseResampler(int in_rate, int out_rate)
      : in_rate_(in_rate), out_rate_(out_rate) {
    if (in_rate <= 0 || out_rate <= 0) {
      Fail(ErrorKind::kParameter, "sample rates must be positive ({} -> {})",
           in_rate, out_rate);
    }
    const int g = std::gcd(in_rate, out_rate);
    up_ = out_rate / g;
    down_ = in_rate / g;
    if (up_ != down_) BuildKernel();
  }

  int up() const { return up_; }
  int down() const { return down_; }

  std::size_t OutputLength(std::size_t n_in) const {
    // ceil(n_in * up / down)
    return static_cast<std::size_t>(
        (static_cast<std::uint64_t>(n_in) * up_ + down_ - 1) / down_);
  }

  std::vector<float> Process(std::span<const float> in) const {
    if (up_ == down_) return {in.begin(), in.end()};
    const std::size_t n_out = OutputLength(in.size());
    std::vector<float> out(n_out);
    constexpr int kHalf = kTapsPerPhase / 2;
    const auto n_in = static_cast<std::int64_t>(in.size());
    for (std::size_t n = 0; n < n_out; ++n) {
      const std::uint64_t pos = static_cast<std::uint64_t>(n) * down_;
      const auto base = static_cast<std::int64_t>(pos / up_);
      const auto phase = static_cast<std::size_t>(pos % up_);
      const double* h = &kernel_[phase * kTapsPerPhase];
      double acc = 0.0;
      for (int j = 0; j < kTapsPerPhase; ++j) {
        const std::int64_t idx = base - kHalf + 1 + j;
        if (idx >= 0 && idx < n_in) acc += h[j] * in[static_cast<std::size_t>(idx)];
      }
      out[n] = static_cast<float>(acc);
    }
    return out;
  }

 private:
  void BuildKernel() {
    constexpr int kHalf = kTapsPerPhase / 2;
    // Cutoff in cycles per input sample.
    const double cutoff = 0.5 * std::min(1.0, static_cast<double>(up_) / down_) *
                          kRolloff;
    const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
    kernel_.assign(static_cast<std::size_t>(up_) * kTapsPerPhase, 0.0);
    for (int p = 0; p < up_; ++p) {
      const double frac = static_cast<double>(p) / up_;
      double sum = 0.0;
      for (int j = 0; j < kTapsPerPhase; ++j) {
        // Offset of tap j from the exact output position, in input samples.
        const double t = static_cast<double>(j - kHalf + 1) - frac;
        const double x = 2.0 * cutoff * t;
        const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
        const double r = t / kHalf;
        const double window =
            std::abs(r) >= 1.0
                ? 0.0
                : std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) /
                      i0_beta;
        const double v = 2.0 * cutoff * sinc * window;
        kernel_[static_cast<std::size_t>(p) * kTapsPerPhase + j] = v;
        sum += v;
      }
      for (int j = 0; j < kTapsPerPhase; ++j) {
        kernel_[static_cast<std::size_t>(p) * kTapsPerPhase + j] /= sum;
      }
    }
  }

  int in_rate_;
  int out_rate_;
  int up_ = 1;
  int down_ = 1;
  std::vector<double> kernel_;  // [phase][tap]
};

inline std::vector<float> Resample(std::span<const float> in, int in_rate,
                                   int out_rate) {
  return PolyphaseResampler(in_rate, out_rate).Process(in);
}

}  // namespace sedkit::featurize
