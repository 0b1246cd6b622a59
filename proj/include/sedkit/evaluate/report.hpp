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

#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sedkit/evaluate/pauc.hpp"
#include "sedkit/evaluate/psds.hpp"

namespace sedkit::evaluate {

struct MetricReport {
  std::optional<PsdsResult> psds;
  std::optional<MpaucResult> mpauc;
  PsdsParams psds_params;
  double max_fpr = kDefaultMaxFpr;
  std::size_t median_window = kDefaultMedianWindow;
  std::vector<std::string> class_names;

  std::string ClassName(std::size_t c) const {
    return c < class_names.size() ? class_names[c] : fmt::format("class_{}", c);
  }

  /// Keys: psds, mpauc, per_class.{psds,mpauc}, mpauc_excluded, params.
  nlohmann::ordered_json ToJson() const {
    nlohmann::ordered_json j;
    if (psds) j["psds"] = psds->psds;
    if (mpauc) j["mpauc"] = mpauc->mpauc;
    if (psds) {
      auto& pc = j["per_class"]["psds"];
      pc = nlohmann::ordered_json::object();
      for (std::size_t k = 0; k < psds->classes.size(); ++k) pc[ClassName(psds->classes[k])] = psds->class_area[k];
    }
    if (mpauc) {
      auto& pc = j["per_class"]["mpauc"];
      pc = nlohmann::ordered_json::object();
      for (std::size_t k = 0; k < mpauc->classes.size(); ++k) pc[ClassName(mpauc->classes[k])] = mpauc->class_pauc[k];
      j["mpauc_excluded"] = nlohmann::ordered_json::array();
      for (std::size_t c : mpauc->excluded) j["mpauc_excluded"].push_back(ClassName(c));
    }
    auto& p = j["params"];
    p["median_window"] = median_window;
    if (psds) {
      p["dtc"] = psds_params.dtc;
      p["gtc"] = psds_params.gtc;
      p["alpha_st"] = psds_params.alpha_st;
      p["alpha_ct"] = 0.0;
      p["e_max"] = psds_params.e_max;
      p["n_thresholds"] = psds_params.thresholds.size();
    }
    if (mpauc) {
      p["max_fpr"] = max_fpr;
      p["soft_positive"] = kSoftPositive;
    }
    return j;
  }

  /// metric<TAB>class<TAB>value, with "all" for the macro value.
  std::string ToRows() const {
    std::string out;
    auto row = [&](const char* metric, const std::string& cls, double v) {
      out += fmt::format("{}\t{}\t{:.6f}\n", metric, cls, v);
    };
    if (psds) {
      row("psds", "all", psds->psds);
      for (std::size_t k = 0; k < psds->classes.size(); ++k) row("psds", ClassName(psds->classes[k]), psds->class_area[k]);
    }
    if (mpauc) {
      row("mpauc", "all", mpauc->mpauc);
      for (std::size_t k = 0; k < mpauc->classes.size(); ++k) row("mpauc", ClassName(mpauc->classes[k]), mpauc->class_pauc[k]);
    }
    return out;
  }
};

}  // namespace sedkit::evaluate
