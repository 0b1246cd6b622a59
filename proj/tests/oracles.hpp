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

// Brute-force reference computations shared by the unit and acceptance
// suites. Nothing here calls into the library code paths being checked.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace sedkit::oracle {

/// O(n^2) DFT magnitude of bins [0, n/2].
inline std::vector<double> DftMagnitude(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = -2.0 * M_PI * static_cast<double>(k * i % n) / static_cast<double>(n);
      acc += x[i] * std::complex<double>(std::cos(a), std::sin(a));
    }
    mag[k] = std::abs(acc);
  }
  return mag;
}

inline std::size_t ArgMax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// Per-window max over rows, written as plainly as possible.
inline std::vector<std::vector<double>> WindowMax(
    const std::vector<std::vector<double>>& frames, std::size_t window) {
  std::vector<std::vector<double>> out;
  for (std::size_t s = 0; s * window < frames.size(); ++s) {
    std::vector<double> row(frames[0].size(), -1.0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      for (std::size_t f = s * window; f < (s + 1) * window; ++f) {
        if (frames[f][c] > row[c]) row[c] = frames[f][c];
      }
    }
    out.push_back(row);
  }
  return out;
}

/// ROC by sweeping every distinct threshold from high to low, then
/// trapezoidal area for FPR in [0, max_fpr] with McClish standardization.
inline double PartialAuc(const std::vector<double>& scores,
                         const std::vector<int>& labels, double max_fpr) {
  std::vector<double> thresholds(scores);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double pos = 0, neg = 0;
  for (int l : labels) (l ? pos : neg) += 1;
  std::vector<std::pair<double, double>> roc = {{0.0, 0.0}};
  for (double th : thresholds) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= th) (labels[i] ? tp : fp) += 1;
    }
    roc.push_back({fp / neg, tp / pos});
  }
  double area = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i) {
    double x0 = roc[i - 1].first, y0 = roc[i - 1].second;
    double x1 = roc[i].first, y1 = roc[i].second;
    if (x0 >= max_fpr) break;
    if (x1 > max_fpr) {
      y1 = y0 + (y1 - y0) * (max_fpr - x0) / (x1 - x0);
      x1 = max_fpr;
    }
    area += (x1 - x0) * (y0 + y1) / 2.0;
  }
  const double min_area = max_fpr * max_fpr / 2.0;
  const double max_area = max_fpr;
  return 0.5 * (1.0 + (area - min_area) / (max_area - min_area));
}

}  // namespace sedkit::oracle
