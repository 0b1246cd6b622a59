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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/random.hpp"
#include "sedkit/common/tensor.hpp"
#include "sedkit/model/config.hpp"
#include "sedkit/model/decoder.hpp"
#include "sedkit/model/layers.hpp"
#include "sedkit/model/parameters.hpp"

namespace sedkit::model {

enum class Mode { kTrain, kEval };

struct ForwardOptions {
  Mode mode = Mode::kEval;
  std::uint64_t dropout_seed = 0;
  bool aux_heads = true;  // training mode only; evaluation never runs them
};

template <typename T>
struct HeadOutput {
  Tensor<T> strong_logits;  // [B, T, C]
  Tensor<T> strong;         // [B, T, C]
  Tensor<T> weak;           // [B, C]
};

template <typename T>
struct ForwardOutput {
  HeadOutput<T> main;
  std::optional<HeadOutput<T>> aux;  // present in training mode only
  Tensor<T> conv_features;           // [B, T, D]
};

/// Gradients flowing into one head pair.
template <typename T>
struct HeadGrad {
  Tensor<T> d_strong_logits;  // [B, T, C]
  Tensor<T> d_weak;           // [B, C]
};

template <typename T>
struct BlockTape {
  FdyCache<T> fdy;
  BatchNormCache<T> bn;
  Tensor<T> bn_out;
  LkaCache<T> lka;
  std::vector<std::size_t> pool_in_shape;
  Tensor<T> dropout_mask;
};

/// Intermediate values retained by a training-mode forward pass.
template <typename T>
struct Tape {
  std::vector<BlockTape<T>> blocks;
  std::vector<DecoderCache<T>> main;
  std::vector<DecoderCache<T>> aux;
  std::size_t input_frames = 0;
};

namespace detail {

template <typename T>
struct BlockParams {
  std::size_t weight, bias, att_weight, att_bias, gamma, beta, running_mean, running_var;
  std::size_t dw_weight, dw_bias, dil_weight, dil_bias, pw_weight, pw_bias;

  static BlockParams Find(const ParameterSet<T>& params, std::size_t block) {
    const std::string p = "cnn." + std::to_string(block) + ".";
    auto ix = [&](const char* s) { return params.IndexOf(p + s); };
    return {ix("fdy.weight"),     ix("fdy.bias"),       ix("fdy.att_weight"),  ix("fdy.att_bias"),
            ix("bn.gamma"),       ix("bn.beta"),        ix("bn.running_mean"), ix("bn.running_var"),
            ix("lka.dw_weight"),  ix("lka.dw_bias"),    ix("lka.dil_weight"),  ix("lka.dil_bias"),
            ix("lka.pw_weight"),  ix("lka.pw_bias")};
  }
};

template <typename T>
LkaParams<T> MakeLka(const ParameterSet<T>& params, const BlockParams<T>& ix, std::size_t dilation) {
  return {params[ix.dw_weight], params[ix.dw_bias], params[ix.dil_weight], params[ix.dil_bias],
          params[ix.pw_weight], params[ix.pw_bias], dilation};
}

/// [B, T, D] slice for one clip as [T, D].
template <typename T>
Tensor<T> Row(const Tensor<T>& x, std::size_t b) {
  const std::size_t n = x.size() / x.dim(0);
  std::vector<std::size_t> shape(x.shape().begin() + 1, x.shape().end());
  Tensor<T> out(shape);
  std::copy_n(x.data() + b * n, n, out.data());
  return out;
}

template <typename T>
void SetRow(Tensor<T>& x, std::size_t b, const Tensor<T>& row) {
  std::copy_n(row.data(), row.size(), x.data() + b * row.size());
}

}  // namespace detail

/// Convolutional stack. features: [B, Cin, frames, bins] (channel-major, as
/// stored in feature files). Returns [B, T_out, D].
template <typename T>
Tensor<T> CnnForward(const ModelConfig& cfg, const ParameterSet<T>& params, const Tensor<T>& features,
                     const ForwardOptions& opts, Tape<T>* tape) {
  if (features.rank() != 4 || features.dim(1) != cfg.in_channels || features.dim(3) != cfg.n_bins) {
    Fail(ErrorKind::kShape, "model expects features [batch, {}, frames, {}], got {}", cfg.in_channels,
         cfg.n_bins, ShapeString(features.shape()));
  }
  const std::size_t B = features.dim(0), Cin = features.dim(1), frames = features.dim(2);
  const std::size_t used = cfg.UsedFrames(frames), F = cfg.n_bins;
  if (used == 0) Fail(ErrorKind::kShape, "{} frames is shorter than the time reduction", frames);
  const bool train = opts.mode == Mode::kTrain;

  Tensor<T> x({B, Cin, F, used});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < Cin; ++c)
      for (std::size_t t = 0; t < used; ++t)
        for (std::size_t f = 0; f < F; ++f) x.at(b, c, f, t) = features.at(b, c, t, f);

  if (tape) {
    tape->blocks.assign(cfg.n_blocks(), BlockTape<T>{});
    tape->input_frames = frames;
  }
  for (std::size_t blk = 0; blk < cfg.n_blocks(); ++blk) {
    const auto ix = detail::BlockParams<T>::Find(params, blk);
    BlockTape<T>* bt = tape ? &tape->blocks[blk] : nullptr;
    Tensor<T> y = FdyConvForward(x, params[ix.weight], params[ix.bias], params[ix.att_weight],
                                 params[ix.att_bias], cfg.fdy_temperature, bt ? &bt->fdy : nullptr);
    y = BatchNormForward(y, params[ix.gamma], params[ix.beta], params[ix.running_mean],
                         params[ix.running_var], train, bt ? &bt->bn : nullptr);
    Tensor<T> act = SiluForward(y);
    if (bt) bt->bn_out = std::move(y);
    y = LkaForward(act, detail::MakeLka(params, ix, cfg.lka_dilation), bt ? &bt->lka : nullptr);
    if (bt) bt->pool_in_shape = y.shape();
    y = AvgPoolForward(y, cfg.freq_pool[blk], cfg.time_pool[blk]);
    if (train && cfg.dropout > 0.0) {
      Rng rng = DeriveRng(opts.dropout_seed, {0xd40u, blk});
      Tensor<T> mask = DropoutMask<T>(y.shape(), cfg.dropout, rng);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
      if (bt) bt->dropout_mask = std::move(mask);
    }
    x = std::move(y);
  }
  // x: [B, D, 1, T_out]
  const std::size_t D = x.dim(1), To = x.dim(3);
  Tensor<T> out({B, To, D});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t d = 0; d < D; ++d)
      for (std::size_t t = 0; t < To; ++t) out.at(b, t, d) = x.at(b, d, 0, t);
  return out;
}

/// Full network. embeddings: [B, T_out, E] when cfg.embedding_dim > 0.
template <typename T>
ForwardOutput<T> ModelForward(const ModelConfig& cfg, const ParameterSet<T>& params,
                              const Tensor<T>& features, const Tensor<T>* embeddings,
                              const ForwardOptions& opts, Tape<T>* tape = nullptr) {
  if (tape && opts.mode != Mode::kTrain) Fail(ErrorKind::kState, "a tape needs a training-mode pass");
  ForwardOutput<T> out;
  out.conv_features = CnnForward(cfg, params, features, opts, tape);
  const std::size_t B = out.conv_features.dim(0), To = out.conv_features.dim(1);
  const std::size_t D = out.conv_features.dim(2), E = cfg.embedding_dim, C = cfg.n_classes;
  if (E > 0) {
    if (!embeddings) Fail(ErrorKind::kShape, "model was configured with {}-dim embeddings", E);
    if (embeddings->rank() != 3 || embeddings->dim(0) != B || embeddings->dim(1) != To ||
        embeddings->dim(2) != E) {
      Fail(ErrorKind::kShape, "embeddings must be [{}, {}, {}], got {}", B, To, E,
           ShapeString(embeddings->shape()));
    }
  }
  const bool with_aux = opts.mode == Mode::kTrain && opts.aux_heads;
  auto alloc = [&](HeadOutput<T>& h) {
    h.strong_logits = Tensor<T>({B, To, C});
    h.strong = Tensor<T>({B, To, C});
    h.weak = Tensor<T>({B, C});
  };
  alloc(out.main);
  if (with_aux) {
    out.aux.emplace();
    alloc(*out.aux);
  }
  if (tape) {
    tape->main.assign(B, DecoderCache<T>{});
    tape->aux.assign(B, DecoderCache<T>{});
  }
  for (std::size_t b = 0; b < B; ++b) {
    Tensor<T> conv = detail::Row(out.conv_features, b);
    Tensor<T> main_in({To, D + E});
    for (std::size_t t = 0; t < To; ++t) {
      std::copy_n(&conv.at(t, 0), D, &main_in.at(t, 0));
      if (E > 0) std::copy_n(&embeddings->at(b, t, 0), E, &main_in.at(t, D));
    }
    auto store = [&](HeadOutput<T>& h, DecoderOutput<T>&& d) {
      detail::SetRow(h.strong_logits, b, d.strong_logits);
      detail::SetRow(h.strong, b, d.strong);
      detail::SetRow(h.weak, b, d.weak);
    };
    store(out.main, DecoderForward(params, "main", main_in, tape ? &tape->main[b] : nullptr));
    if (with_aux) store(*out.aux, DecoderForward(params, "aux", conv, tape ? &tape->aux[b] : nullptr));
  }
  return out;
}

/// Gradients of all tensors (zero for batch-norm buffers) given the
/// gradients at the heads. aux may be null when no loss reaches it.
template <typename T>
ParameterSet<T> ModelBackward(const ModelConfig& cfg, const ParameterSet<T>& params, const Tape<T>& tape,
                              const HeadGrad<T>& main, const HeadGrad<T>* aux) {
  ParameterSet<T> grads = params.ZerosLike();
  const std::size_t B = main.d_weak.dim(0), D = cfg.conv_out_dim();
  const std::size_t To = main.d_strong_logits.dim(1);
  Tensor<T> dx({B, D, 1, To});
  for (std::size_t b = 0; b < B; ++b) {
    Tensor<T> dm = DecoderBackward(params, "main", tape.main[b], detail::Row(main.d_strong_logits, b),
                                   detail::Row(main.d_weak, b), grads);
    for (std::size_t t = 0; t < To; ++t)
      for (std::size_t d = 0; d < D; ++d) dx.at(b, d, 0, t) += dm.at(t, d);
    if (aux) {
      Tensor<T> da = DecoderBackward(params, "aux", tape.aux[b], detail::Row(aux->d_strong_logits, b),
                                     detail::Row(aux->d_weak, b), grads);
      for (std::size_t t = 0; t < To; ++t)
        for (std::size_t d = 0; d < D; ++d) dx.at(b, d, 0, t) += da.at(t, d);
    }
  }
  for (std::size_t blk = cfg.n_blocks(); blk-- > 0;) {
    const auto ix = detail::BlockParams<T>::Find(params, blk);
    const BlockTape<T>& bt = tape.blocks[blk];
    if (!bt.dropout_mask.empty()) {
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= bt.dropout_mask[i];
    }
    dx = AvgPoolBackward(bt.pool_in_shape, cfg.freq_pool[blk], cfg.time_pool[blk], dx);
    dx = LkaBackward(bt.lka, detail::MakeLka(params, ix, cfg.lka_dilation), dx,
                     LkaGrads<T>{&grads[ix.dw_weight], &grads[ix.dw_bias], &grads[ix.dil_weight],
                                 &grads[ix.dil_bias], &grads[ix.pw_weight], &grads[ix.pw_bias]});
    dx = SiluBackward(bt.bn_out, dx);
    dx = BatchNormBackward(bt.bn, params[ix.gamma], dx, grads[ix.gamma], grads[ix.beta]);
    dx = FdyConvBackward(bt.fdy, params[ix.weight], params[ix.bias], params[ix.att_weight],
                         cfg.fdy_temperature, dx,
                         FdyGrads<T>{&grads[ix.weight], &grads[ix.bias], &grads[ix.att_weight],
                                     &grads[ix.att_bias]});
  }
  return grads;
}

/// Moves each block's running statistics toward the batch statistics
/// recorded on the tape.
template <typename T>
void UpdateRunningStats(const ModelConfig& cfg, ParameterSet<T>& params, const Tape<T>& tape,
                        double momentum = kBatchNormMomentum) {
  for (std::size_t blk = 0; blk < cfg.n_blocks(); ++blk) {
    const auto ix = detail::BlockParams<T>::Find(params, blk);
    UpdateRunningStats(tape.blocks[blk].bn, params[ix.running_mean], params[ix.running_var], momentum);
  }
}

}  // namespace sedkit::model
