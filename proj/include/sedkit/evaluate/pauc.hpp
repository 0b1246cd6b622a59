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
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/tensor.hpp"
#include "sedkit/datasets/labels.hpp"

namespace sedkit::evaluate {

inline constexpr double kDefaultMaxFpr = 0.1;
inline constexpr double kSoftPositive = 0.5;

/// Partial ROC area for FPR in [0, max_fpr], McClish-standardized so a
/// random ranking scores 0.5 and a perfect one 1.0. Tied scores form one
/// ROC step. Needs at least one positive and one negative.
inline double PartialAuc(const std::vector<double>& scores, const std::vector<bool>& labels,
                         double max_fpr = kDefaultMaxFpr) {
  if (scores.size() != labels.size()) Fail(ErrorKind::kShape, "pauc: {} scores vs {} labels", scores.size(), labels.size());
  const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0 || neg == 0) Fail(ErrorKind::kMetric, "pauc needs positives and negatives");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double area = 0, tp = 0, fp = 0, prev_fpr = 0, prev_tpr = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] ? tp : fp) += 1;
      ++i;
    }
    const double fpr = fp / neg, tpr = tp / pos;
    if (fpr >= max_fpr) {
      const double w = fpr > prev_fpr ? (max_fpr - prev_fpr) / (fpr - prev_fpr) : 0.0;
      const double tpr_cut = prev_tpr + w * (tpr - prev_tpr);
      area += (max_fpr - prev_fpr) * (prev_tpr + tpr_cut) / 2;
      prev_fpr = max_fpr;
      break;
    }
    area += (fpr - prev_fpr) * (prev_tpr + tpr) / 2;
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  const double min_area = 0.5 * max_fpr * max_fpr;
  return 0.5 * (1.0 + (area - min_area) / (max_fpr - min_area));
}

struct MpaucResult {
  double mpauc = 0;
  std::vector<std::size_t> classes;  // classes that entered the average
  std::vector<double> class_pauc;
  std::vector<std::size_t> excluded;  // lacking positives or negatives
};

/// scores: clip -> [frames, C] posteriors, reduced to 1-s segments by
/// window max; references: clip -> [segments, C] soft labels, positive at
/// >= 0.5. classes restricts the average (empty: all classes).
inline MpaucResult Mpauc(const std::map<std::string, Tensor<float>>& scores,
                         const std::map<std::string, datasets::SoftLabelSet>& references,
                         const std::vector<std::size_t>& classes = {}, double max_fpr = kDefaultMaxFpr) {
  if (references.empty()) Fail(ErrorKind::kMetric, "mpauc: empty reference set");
  const std::size_t window = datasets::kFramesPerSegment;
  std::size_t C = 0;
  std::vector<std::vector<double>> seg_scores;
  std::vector<std::vector<bool>> seg_labels;
  for (const auto& [id, ref] : references) {
    auto it = scores.find(id);
    if (it == scores.end()) Fail(ErrorKind::kMetric, "mpauc: reference clip {} has no scores", id);
    const auto& s = it->second;
    if (C == 0) {
      C = s.dim(1);
      seg_scores.assign(C, {});
      seg_labels.assign(C, {});
    }
    if (s.rank() != 2 || s.dim(1) != C || s.dim(0) % window != 0) {
      Fail(ErrorKind::kShape, "mpauc: clip {} has shape {}", id, ShapeString(s.shape()));
    }
    const std::size_t n_seg = s.dim(0) / window;
    const auto& r = ref.segments;
    if (r.rank() != 2 || r.dim(1) != C) Fail(ErrorKind::kShape, "mpauc: clip {} reference has shape {}", id, ShapeString(r.shape()));
    const std::size_t used = std::min(n_seg, r.dim(0));
    for (std::size_t seg = 0; seg < used; ++seg) {
      for (std::size_t c = 0; c < C; ++c) {
        float m = s.at(seg * window, c);
        for (std::size_t f = seg * window + 1; f < (seg + 1) * window; ++f) m = std::max(m, s.at(f, c));
        seg_scores[c].push_back(m);
        seg_labels[c].push_back(r.at(seg, c) >= kSoftPositive);
      }
    }
  }
  std::vector<std::size_t> wanted = classes;
  if (wanted.empty()) {
    wanted.resize(C);
    std::iota(wanted.begin(), wanted.end(), std::size_t{0});
  }
  MpaucResult res;
  for (std::size_t c : wanted) {
    if (c >= C) Fail(ErrorKind::kMetric, "mpauc: class {} outside [0, {})", c, C);
    const auto& l = seg_labels[c];
    const auto pos = std::count(l.begin(), l.end(), true);
    if (pos == 0 || pos == static_cast<long>(l.size())) {
      res.excluded.push_back(c);
      continue;
    }
    res.classes.push_back(c);
    res.class_pauc.push_back(PartialAuc(seg_scores[c], l, max_fpr));
  }
  if (res.classes.empty()) Fail(ErrorKind::kMetric, "mpauc: no class has both positive and negative segments");
  res.mpauc = std::accumulate(res.class_pauc.begin(), res.class_pauc.end(), 0.0) /
              static_cast<double>(res.class_pauc.size());
  return res;
}

}  // namespace sedkit::evaluate
