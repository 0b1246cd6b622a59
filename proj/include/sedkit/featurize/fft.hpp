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
#include <cstddef>
#include <span>
#include <vector>

#include "sedkit/common/error.hpp"

namespace sedkit::featurize {

/// In-place iterative radix-2 FFT with precomputed twiddles and bit-reversal
/// table. Sizes must be powers of two.
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n) {
    if (n < 2 || (n & (n - 1)) != 0) {
      Fail(ErrorKind::kParameter, "FFT size {} is not a power of two", n);
    }
    twiddles_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
      twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
    reversed_.resize(n);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) {
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      }
      reversed_[i] = r;
    }
  }

  std::size_t size() const { return n_; }

  void Forward(std::span<std::complex<double>> data) const {
    if (data.size() != n_) Fail(ErrorKind::kShape, "FFT input size mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
      if (i < reversed_[i]) std::swap(data[i], data[reversed_[i]]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const auto w = twiddles_[k * stride];
          const auto a = data[start + k];
          const auto b = data[start + k + half] * w;
          data[start + k] = a + b;
          data[start + k + half] = a - b;
        }
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<std::complex<double>> twiddles_;
  std::vector<std::size_t> reversed_;
};

}  // namespace sedkit::featurize
