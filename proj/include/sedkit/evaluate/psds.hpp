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
#include <map>
#include <string>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/tensor.hpp"
#include "sedkit/datasets/labels.hpp"
#include "sedkit/evaluate/postprocess.hpp"

// Polyphonic sound detection score over a threshold sweep: intersection
// based matching, per-class TPR versus false positives per hour, and the
// normalized area under the cross-class penalized ROC.

namespace sedkit::evaluate {

struct PsdsParams {
  double dtc = 0.7;
  double gtc = 0.7;
  double alpha_st = 1.0;
  double e_max = 100.0;  // false positives per hour
  std::vector<double> thresholds = DefaultThresholds();

  static std::vector<double> DefaultThresholds() {
    std::vector<double> t;
    for (int i = 0; i < 50; ++i) t.push_back(0.01 + 0.02 * i);
    return t;
  }
};

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t n_ref = 0;

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

inline double Overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

/// Matches one clip's detections against its references. A detection is
/// valid when the fraction of it covered by same-class references reaches
/// dtc; otherwise it is a false positive. A reference is detected when
/// valid same-class detections cover at least gtc of it.
inline std::vector<ClassCounts> MatchClip(const std::vector<DecodedEvent>& detections,
                                          const std::vector<datasets::StrongEvent>& references,
                                          std::size_t n_classes, double dtc, double gtc) {
  std::vector<ClassCounts> counts(n_classes);
  std::vector<bool> valid(detections.size(), false);
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const auto& d = detections[i];
    double covered = 0;
    for (const auto& g : references) {
      if (static_cast<std::size_t>(g.class_id) == d.class_id) covered += Overlap(d.onset, d.offset, g.onset_s, g.offset_s);
    }
    valid[i] = covered / (d.offset - d.onset) >= dtc;
    if (!valid[i]) ++counts.at(d.class_id).fp;
  }
  for (const auto& g : references) {
    const auto c = static_cast<std::size_t>(g.class_id);
    ++counts.at(c).n_ref;
    double covered = 0;
    for (std::size_t i = 0; i < detections.size(); ++i) {
      if (valid[i] && detections[i].class_id == c) covered += Overlap(detections[i].onset, detections[i].offset, g.onset_s, g.offset_s);
    }
    if (covered / (g.offset_s - g.onset_s) >= gtc) ++counts[c].tp;
  }
  return counts;
}

struct OperatingPoint {
  double threshold = 0;
  std::vector<double> tpr;  // per class
  std::vector<double> fpr;  // per class, false positives per hour
};

struct PsdsResult {
  double psds = 0;
  std::vector<std::size_t> classes;    // classes that entered the average
  std::vector<double> class_area;      // normalized area of each class's own ROC
  std::vector<OperatingPoint> points;  // one per threshold
};

/// scores: clip id -> [frames, C]; references: clip id -> events. Clips
/// without references count as event-free. Durations come from the frame
/// count on the 40-ms grid.
inline PsdsResult Psds(const std::map<std::string, Tensor<float>>& scores,
                       const std::map<std::string, datasets::StrongLabelSet>& references,
                       const PsdsParams& params = {}) {
  if (scores.empty()) Fail(ErrorKind::kMetric, "psds: no score tensors");
  const std::size_t C = scores.begin()->second.dim(1);
  for (const auto& [id, _] : references) {
    if (!scores.count(id)) Fail(ErrorKind::kMetric, "psds: reference clip {} has no scores", id);
  }
  double seconds = 0;
  std::vector<std::size_t> n_ref(C, 0);
  for (const auto& [id, s] : scores) {
    if (s.rank() != 2 || s.dim(1) != C) Fail(ErrorKind::kShape, "psds: clip {} has shape {}", id, ShapeString(s.shape()));
    seconds += static_cast<double>(s.dim(0)) * datasets::kOutputFrameSeconds;
  }
  for (const auto& [id, r] : references) {
    for (const auto& e : r.events) {
      if (e.class_id < 0 || static_cast<std::size_t>(e.class_id) >= C) {
        Fail(ErrorKind::kMetric, "psds: clip {} references class {} outside [0, {})", id, e.class_id, C);
      }
      ++n_ref[static_cast<std::size_t>(e.class_id)];
    }
  }
  PsdsResult res;
  for (std::size_t c = 0; c < C; ++c) {
    if (n_ref[c] > 0) res.classes.push_back(c);
  }
  if (res.classes.empty()) Fail(ErrorKind::kMetric, "psds: reference set has no events");
  const double hours = seconds / 3600.0;
  static const datasets::StrongLabelSet kNoEvents;
  for (double th : params.thresholds) {
    std::vector<ClassCounts> total(C);
    for (const auto& [id, s] : scores) {
      auto it = references.find(id);
      const auto& refs = it == references.end() ? kNoEvents : it->second;
      const auto counts = MatchClip(DecodeEvents(s, th), refs.events, C, params.dtc, params.gtc);
      for (std::size_t c = 0; c < C; ++c) {
        total[c].tp += counts[c].tp;
        total[c].fp += counts[c].fp;
      }
    }
    OperatingPoint op;
    op.threshold = th;
    for (std::size_t c : res.classes) {
      op.tpr.push_back(static_cast<double>(total[c].tp) / static_cast<double>(n_ref[c]));
      op.fpr.push_back(static_cast<double>(total[c].fp) / hours);
    }
    res.points.push_back(std::move(op));
  }
  // Per-class step ROC: best TPR reachable at or below each FP rate.
  const std::size_t K = res.classes.size();
  auto tpr_at = [&](std::size_t k, double x) {
    double best = 0;
    for (const auto& op : res.points) {
      if (op.fpr[k] <= x) best = std::max(best, op.tpr[k]);
    }
    return best;
  };
  std::vector<double> grid = {0.0};
  for (const auto& op : res.points)
    for (double f : op.fpr) {
      if (f < params.e_max) grid.push_back(f);
    }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double area = 0;
  res.class_area.assign(K, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double width = (i + 1 < grid.size() ? grid[i + 1] : params.e_max) - grid[i];
    double mean = 0, sq = 0;
    std::vector<double> v(K);
    for (std::size_t k = 0; k < K; ++k) {
      v[k] = tpr_at(k, grid[i]);
      mean += v[k];
      res.class_area[k] += v[k] * width;
    }
    mean /= static_cast<double>(K);
    for (double x : v) sq += (x - mean) * (x - mean);
    const double etpr = std::max(0.0, mean - params.alpha_st * std::sqrt(sq / static_cast<double>(K)));
    area += etpr * width;
  }
  for (auto& a : res.class_area) a /= params.e_max;
  res.psds = area / params.e_max;
  return res;
}

}  // namespace sedkit::evaluate
