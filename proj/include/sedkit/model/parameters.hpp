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
#include <map>
#include <string>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/random.hpp"
#include "sedkit/common/tensor.hpp"
#include "sedkit/model/config.hpp"

namespace sedkit::model {

enum class Init { kXavier, kZeros, kOnes };

struct ParamSpec {
  std::string name;
  std::vector<std::size_t> shape;
  Init init = Init::kZeros;
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  bool trainable = true;  // false for batch-norm running statistics
};

/// Xavier/Glorot uniform bound sqrt(6 / (fan_in + fan_out)).
inline double XavierBound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

/// Named tensors in a fixed order. Copies are deep: two sets never share
/// storage.
template <typename T>
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor<T> value;
    bool trainable = true;
  };

  std::size_t Add(std::string name, Tensor<T> value, bool trainable = true) {
    if (index_.count(name)) Fail(ErrorKind::kState, "duplicate parameter {}", name);
    index_[name] = entries_.size();
    entries_.push_back({std::move(name), std::move(value), trainable});
    return entries_.size() - 1;
  }

  std::size_t size() const { return entries_.size(); }
  Entry& entry(std::size_t i) { return entries_[i]; }
  const Entry& entry(std::size_t i) const { return entries_[i]; }
  Tensor<T>& operator[](std::size_t i) { return entries_[i].value; }
  const Tensor<T>& operator[](std::size_t i) const { return entries_[i].value; }

  bool Contains(const std::string& name) const { return index_.count(name) > 0; }
  std::size_t IndexOf(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) Fail(ErrorKind::kState, "no parameter named {}", name);
    return it->second;
  }
  Tensor<T>& Get(const std::string& name) { return entries_[IndexOf(name)].value; }
  const Tensor<T>& Get(const std::string& name) const { return entries_[IndexOf(name)].value; }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Same names and shapes, all zeros.
  ParameterSet ZerosLike() const {
    ParameterSet out;
    for (const auto& e : entries_) out.Add(e.name, Tensor<T>(e.value.shape()), e.trainable);
    return out;
  }

  template <typename U>
  ParameterSet<U> Cast() const {
    ParameterSet<U> out;
    for (const auto& e : entries_) out.Add(e.name, e.value.template Cast<U>(), e.trainable);
    return out;
  }

  std::size_t ElementCount(bool trainable_only = false) const {
    std::size_t n = 0;
    for (const auto& e : entries_) {
      if (!trainable_only || e.trainable) n += e.value.size();
    }
    return n;
  }

  bool AllFinite() const {
    for (const auto& e : entries_) {
      for (const auto& v : e.value.values()) {
        if (!std::isfinite(static_cast<double>(v))) return false;
      }
    }
    return true;
  }

  friend bool operator==(const ParameterSet& a, const ParameterSet& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
      if (a.entries_[i].name != b.entries_[i].name || !(a.entries_[i].value == b.entries_[i].value)) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
};

namespace detail {

inline void AddDecoderSpecs(std::vector<ParamSpec>& specs, const std::string& prefix,
                            std::size_t input_dim, const ModelConfig& cfg) {
  const std::size_t h = cfg.rnn_hidden;
  for (std::size_t layer = 0; layer < 2; ++layer) {
    const std::size_t in = layer == 0 ? input_dim : 2 * h;
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string p = prefix + ".gru" + std::to_string(layer) + "." + dir;
      specs.push_back({p + ".w_ih", {3 * h, in}, Init::kXavier, in, 3 * h});
      specs.push_back({p + ".w_hh", {3 * h, h}, Init::kXavier, h, 3 * h});
      specs.push_back({p + ".b_ih", {3 * h}, Init::kZeros});
      specs.push_back({p + ".b_hh", {3 * h}, Init::kZeros});
    }
  }
  specs.push_back({prefix + ".classifier.weight", {cfg.n_classes, 2 * h}, Init::kXavier, 2 * h,
                   cfg.n_classes});
  specs.push_back({prefix + ".classifier.bias", {cfg.n_classes}, Init::kZeros});
  specs.push_back({prefix + ".attention.weight", {cfg.n_classes, 2 * h}, Init::kXavier, 2 * h,
                   cfg.n_classes});
  specs.push_back({prefix + ".attention.bias", {cfg.n_classes}, Init::kZeros});
}

}  // namespace detail

/// Every tensor of the network, in storage order: CNN blocks, then the main
/// decoder, then the auxiliary decoder. The auxiliary decoder's input is the
/// CNN output only, so its first recurrent layer is narrower when
/// embeddings are fused into the main decoder.
inline std::vector<ParamSpec> BuildParamSpecs(const ModelConfig& cfg) {
  cfg.Validate();
  std::vector<ParamSpec> specs;
  std::size_t in = cfg.in_channels;
  for (std::size_t b = 0; b < cfg.n_blocks(); ++b) {
    const std::size_t out = cfg.conv_channels[b];
    const std::string p = "cnn." + std::to_string(b);
    const std::size_t k = cfg.fdy_basis;
    specs.push_back({p + ".fdy.weight", {k, out, in, 3, 3}, Init::kXavier, in * 9, out * 9});
    specs.push_back({p + ".fdy.bias", {k, out}, Init::kZeros});
    specs.push_back({p + ".fdy.att_weight", {k, in}, Init::kXavier, in, k});
    specs.push_back({p + ".fdy.att_bias", {k}, Init::kZeros});
    specs.push_back({p + ".bn.gamma", {out}, Init::kOnes});
    specs.push_back({p + ".bn.beta", {out}, Init::kZeros});
    specs.push_back({p + ".bn.running_mean", {out}, Init::kZeros, 0, 0, false});
    specs.push_back({p + ".bn.running_var", {out}, Init::kOnes, 0, 0, false});
    const std::size_t dk = cfg.lka_dw_kernel, lk = cfg.lka_dilated_kernel;
    specs.push_back({p + ".lka.dw_weight", {out, dk, dk}, Init::kXavier, dk * dk, out * dk * dk});
    specs.push_back({p + ".lka.dw_bias", {out}, Init::kZeros});
    specs.push_back({p + ".lka.dil_weight", {out, lk, lk}, Init::kXavier, lk * lk, out * lk * lk});
    specs.push_back({p + ".lka.dil_bias", {out}, Init::kZeros});
    specs.push_back({p + ".lka.pw_weight", {out, out}, Init::kXavier, out, out});
    specs.push_back({p + ".lka.pw_bias", {out}, Init::kZeros});
    in = out;
  }
  detail::AddDecoderSpecs(specs, "main", cfg.conv_out_dim() + cfg.embedding_dim, cfg);
  detail::AddDecoderSpecs(specs, "aux", cfg.conv_out_dim(), cfg);
  return specs;
}

/// Xavier-uniform weights, zero biases, unit batch-norm scales; one
/// generator walks the tensors in storage order so the result depends only
/// on the config and the seed.
template <typename T>
ParameterSet<T> InitParams(const ModelConfig& cfg, std::uint64_t seed) {
  Rng rng = DeriveRng(seed, {0x1417u});
  ParameterSet<T> params;
  for (const auto& spec : BuildParamSpecs(cfg)) {
    Tensor<T> t(spec.shape);
    switch (spec.init) {
      case Init::kZeros: break;
      case Init::kOnes: t.Fill(T(1)); break;
      case Init::kXavier: {
        const double b = XavierBound(spec.fan_in, spec.fan_out);
        for (auto& v : t.values()) v = static_cast<T>(b * (2.0 * Uniform01(rng) - 1.0));
        break;
      }
    }
    params.Add(spec.name, std::move(t), spec.trainable);
  }
  return params;
}

/// Names/shapes must match the config's layout exactly.
template <typename T>
void CheckLayout(const ParameterSet<T>& params, const ModelConfig& cfg) {
  const auto specs = BuildParamSpecs(cfg);
  if (specs.size() != params.size()) {
    Fail(ErrorKind::kShape, "parameter set has {} tensors, config needs {}", params.size(),
         specs.size());
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& e = params.entry(i);
    if (e.name != specs[i].name || e.value.shape() != specs[i].shape) {
      Fail(ErrorKind::kShape, "parameter {} ({}) does not match config ({} {})", i, e.name,
           specs[i].name, ShapeString(specs[i].shape));
    }
  }
}

}  // namespace sedkit::model
