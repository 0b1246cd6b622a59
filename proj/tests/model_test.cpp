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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "sedkit/model/checkpoint.hpp"
#include "sedkit/model/crnn.hpp"
#include "sedkit/model/embeddings.hpp"
#include "test_util.hpp"

namespace sedkit::model {
namespace {

ModelConfig TinyConfig(std::size_t classes = 3) {
  ModelConfig c;
  c.n_classes = classes;
  c.n_bins = 16;
  c.conv_channels = {4, 4};
  c.time_pool = {2, 2};
  c.freq_pool = {4, 4};
  c.rnn_hidden = 8;
  c.dropout = 0.2;
  return c;
}

// Full-size input geometry with very narrow layers.
ModelConfig NarrowConfig(std::size_t classes) {
  ModelConfig c;
  c.n_classes = classes;
  c.conv_channels = {2, 2, 2, 2, 2, 2, 3};
  c.rnn_hidden = 4;
  return c;
}

template <typename T>
Tensor<T> RandomTensor(std::vector<std::size_t> shape, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  Tensor<T> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(dist(rng));
  return t;
}

// Direct 3x3 same convolution on [B, Cin, F, T], weight [Cout, Cin, 3(t), 3(f)].
Tensor<double> NaiveConv(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>& b) {
  const std::size_t B = x.dim(0), Cin = x.dim(1), F = x.dim(2), Tm = x.dim(3), Cout = w.dim(0);
  Tensor<double> y({B, Cout, F, Tm});
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t co = 0; co < Cout; ++co)
      for (std::size_t f = 0; f < F; ++f)
        for (std::size_t t = 0; t < Tm; ++t) {
          double s = b[co];
          for (std::size_t ci = 0; ci < Cin; ++ci)
            for (int dt = -1; dt <= 1; ++dt)
              for (int df = -1; df <= 1; ++df) {
                const long ff = static_cast<long>(f) + df, tt = static_cast<long>(t) + dt;
                if (ff < 0 || tt < 0 || ff >= static_cast<long>(F) || tt >= static_cast<long>(Tm)) continue;
                s += w[((co * Cin + ci) * 3 + (dt + 1)) * 3 + (df + 1)] * x.at(n, ci, ff, tt);
              }
          y.at(n, co, f, t) = s;
        }
  return y;
}

TEST(Init, XavierBoundForSmallFan) { EXPECT_DOUBLE_EQ(XavierBound(3, 3), 1.0); }

TEST(Init, SameSeedIsBitIdentical) {
  const auto cfg = TinyConfig();
  EXPECT_TRUE(InitParams<float>(cfg, 7) == InitParams<float>(cfg, 7));
  EXPECT_FALSE(InitParams<float>(cfg, 7) == InitParams<float>(cfg, 8));
}

TEST(Init, UniformLawAndBiases) {
  const ModelConfig cfg;
  const auto params = InitParams<double>(cfg, 42);
  EXPECT_TRUE(params.AllFinite());
  const auto& w = params.Get("cnn.4.lka.pw_weight");
  ASSERT_EQ(w.shape(), (std::vector<std::size_t>{128, 128}));
  const double b = XavierBound(128, 128);
  double sum = 0;
  for (double v : w.values()) {
    EXPECT_LE(std::abs(v), b);
    sum += v;
  }
  const double mean = sum / static_cast<double>(w.size());
  const double sigma = b / std::sqrt(3.0 * static_cast<double>(w.size()));
  EXPECT_LT(std::abs(mean), 3 * sigma);
  for (const auto& e : params.entries()) {
    if (e.name.ends_with("bias") || e.name.ends_with("b_ih") || e.name.ends_with("b_hh")) {
      for (double v : e.value.values()) ASSERT_EQ(v, 0.0) << e.name;
    }
  }
}

TEST(Init, AuxDecoderNarrowerWithEmbeddings) {
  auto cfg = TinyConfig();
  cfg.embedding_dim = 5;
  const auto params = InitParams<float>(cfg, 1);
  EXPECT_EQ(params.Get("main.gru0.fwd.w_ih").dim(1), 9u);
  EXPECT_EQ(params.Get("aux.gru0.fwd.w_ih").dim(1), 4u);
}

TEST(Init, AuxAndMainStorageDisjoint) {
  const auto cfg = TinyConfig();
  auto params = InitParams<float>(cfg, 3);
  const auto main_before = params.Get("main.gru0.fwd.w_hh");
  params.Get("aux.gru0.fwd.w_hh").Fill(5.0f);
  EXPECT_TRUE(params.Get("main.gru0.fwd.w_hh") == main_before);
  for (const auto& e : params.entries()) {
    if (e.name.rfind("aux.", 0) != 0) continue;
    const auto& m = params.Get("main." + e.name.substr(4));
    EXPECT_NE(m.data(), e.value.data());
  }
}

TEST(Config, RejectsFrequencyPoolMismatch) {
  auto cfg = TinyConfig();
  cfg.freq_pool = {4, 2};
  EXPECT_THROW(cfg.Validate(), Error);
}

TEST(Config, DefaultReductions) {
  const ModelConfig cfg;
  EXPECT_EQ(cfg.time_reduction(), 4u);
  EXPECT_EQ(cfg.freq_reduction(), 128u);
  EXPECT_EQ(cfg.OutputFrames(1001), 250u);
}

TEST(Fdy, AttentionRowsSumToOne) {
  const auto x = RandomTensor<double>({2, 3, 6, 9}, 1);
  const auto aw = RandomTensor<double>({4, 3}, 2, 5.0);
  const auto ab = RandomTensor<double>({4}, 3);
  const auto att = FdyAttention(x, aw, ab, 31.0);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t f = 0; f < 6; ++f) {
      double s = 0;
      for (std::size_t k = 0; k < 4; ++k) s += att.at(b, k, f);
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
}

TEST(Fdy, SingleKernelIsPlainConvolution) {
  const auto x = RandomTensor<float>({2, 3, 5, 7}, 4);
  const auto w = RandomTensor<float>({1, 4, 3, 3, 3}, 5);
  const auto b = RandomTensor<float>({1, 4}, 6);
  const auto aw = RandomTensor<float>({1, 3}, 7);
  const auto ab = RandomTensor<float>({1}, 8);
  Tensor<float> w_plain = w, b_plain = b;
  w_plain.Reshape({4, 3, 3, 3});
  b_plain.Reshape({4});
  EXPECT_TRUE(FdyConvForward(x, w, b, aw, ab, 31.0, nullptr) == Conv3x3Forward(x, w_plain, b_plain));
}

TEST(Fdy, PlainConvolutionMatchesDirectSum) {
  const auto x = RandomTensor<double>({2, 3, 5, 7}, 9);
  const auto w = RandomTensor<double>({4, 3, 3, 3}, 10);
  const auto b = RandomTensor<double>({4}, 11);
  const auto got = Conv3x3Forward(x, w, b);
  const auto want = NaiveConv(x, w, b);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(Fdy, OutputIsAttentionMixOfBasisConvolutions) {
  const auto x = RandomTensor<double>({1, 2, 4, 6}, 12);
  const auto w = RandomTensor<double>({3, 2, 2, 3, 3}, 13);
  const auto b = RandomTensor<double>({3, 2}, 14);
  const auto aw = RandomTensor<double>({3, 2}, 15, 20.0);
  const auto ab = RandomTensor<double>({3}, 16);
  const auto att = FdyAttention(x, aw, ab, 31.0);
  const auto y = FdyConvForward(x, w, b, aw, ab, 31.0, nullptr);
  std::vector<Tensor<double>> basis;
  for (std::size_t k = 0; k < 3; ++k) {
    Tensor<double> wk({2, 2, 3, 3}), bk({2});
    std::copy_n(w.data() + k * 36, 36, wk.data());
    std::copy_n(b.data() + k * 2, 2, bk.data());
    basis.push_back(NaiveConv(x, wk, bk));
  }
  for (std::size_t co = 0; co < 2; ++co)
    for (std::size_t f = 0; f < 4; ++f)
      for (std::size_t t = 0; t < 6; ++t) {
        double want = 0;
        for (std::size_t k = 0; k < 3; ++k) want += att.at(0, k, f) * basis[k].at(0, co, f, t);
        EXPECT_NEAR(y.at(0, co, f, t), want, 1e-12);
      }
}

TEST(Fdy, ZeroInputZeroBiasGivesZero) {
  Tensor<float> x({1, 3, 4, 5});
  const auto w = RandomTensor<float>({4, 2, 3, 3, 3}, 17);
  Tensor<float> b({4, 2});
  const auto aw = RandomTensor<float>({4, 3}, 18);
  Tensor<float> ab({4});
  const auto y = FdyConvForward(x, w, b, aw, ab, 31.0, nullptr);
  for (float v : y.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Fdy, RejectsChannelMismatch) {
  Tensor<float> x({1, 2, 4, 5});
  Tensor<float> w({4, 2, 3, 3, 3}), b({4, 2}), aw({4, 3}), ab({4});
  EXPECT_THROW(FdyConvForward(x, w, b, aw, ab, 31.0, nullptr), Error);
}

struct LkaTensors {
  Tensor<double> dw, dwb, dil, dilb, pw, pwb;
  LkaParams<double> Params() const { return {dw, dwb, dil, dilb, pw, pwb, 3}; }
};

LkaTensors RandomLka(std::size_t c, std::uint64_t seed) {
  return {RandomTensor<double>({c, 5, 5}, seed),     RandomTensor<double>({c}, seed + 1),
          RandomTensor<double>({c, 7, 7}, seed + 2), RandomTensor<double>({c}, seed + 3),
          RandomTensor<double>({c, c}, seed + 4),    RandomTensor<double>({c}, seed + 5)};
}

TEST(Lka, UnitAttentionIsIdentity) {
  auto p = RandomLka(3, 20);
  p.pw.Fill(0.0);
  p.pwb.Fill(1.0);
  const auto x = RandomTensor<double>({2, 3, 6, 11}, 21);
  EXPECT_TRUE(LkaForward(x, p.Params()) == x);
}

TEST(Lka, ZeroInputAndShape) {
  const auto p = RandomLka(3, 30);
  Tensor<double> zero({1, 3, 4, 9});
  const auto y = LkaForward(zero, p.Params());
  for (double v : y.values()) EXPECT_EQ(v, 0.0);
  const auto x = RandomTensor<double>({2, 3, 1, 2}, 31);
  EXPECT_EQ(LkaForward(x, p.Params()).shape(), x.shape());
}

TEST(Lka, DilatedDepthwiseMatchesDirectSum) {
  const auto x = RandomTensor<double>({1, 2, 8, 12}, 40);
  const auto w = RandomTensor<double>({2, 7, 7}, 41);
  const auto b = RandomTensor<double>({2}, 42);
  const auto y = DepthwiseForward(x, w, b, 3);
  for (std::size_t c = 0; c < 2; ++c)
    for (long f = 0; f < 8; ++f)
      for (long t = 0; t < 12; ++t) {
        double s = b[c];
        for (long i = 0; i < 7; ++i)
          for (long j = 0; j < 7; ++j) {
            const long ff = f + 3 * i - 9, tt = t + 3 * j - 9;
            if (ff < 0 || tt < 0 || ff >= 8 || tt >= 12) continue;
            s += w.at(c, i, j) * x.at(0, c, ff, tt);
          }
        EXPECT_NEAR(y.at(0, c, f, t), s, 1e-12);
      }
}

TEST(BatchNorm, EvalUsesRunningStatistics) {
  const auto x = RandomTensor<double>({2, 2, 3, 4}, 50);
  Tensor<double> gamma({2}), beta({2}), mean({2}), var({2});
  gamma.Fill(2.0);
  beta.Fill(0.5);
  mean[0] = 1.0;
  mean[1] = -1.0;
  var[0] = 4.0;
  var[1] = 0.25;
  const auto y = BatchNormForward(x, gamma, beta, mean, var, false);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < 12; ++i) {
        const double xv = x[(b * 2 + c) * 12 + i];
        EXPECT_NEAR(y[(b * 2 + c) * 12 + i], 2.0 * (xv - mean[c]) / std::sqrt(var[c] + 1e-5) + 0.5, 1e-12);
      }
}

TEST(BatchNorm, RunningStatisticsUpdate) {
  const auto x = RandomTensor<double>({3, 1, 2, 5}, 51);
  Tensor<double> gamma({1}), beta({1}), mean({1}), var({1});
  gamma.Fill(1.0);
  var.Fill(1.0);
  BatchNormCache<double> cache;
  BatchNormForward(x, gamma, beta, mean, var, true, &cache);
  double m = 0;
  for (double v : x.values()) m += v;
  m /= 30.0;
  double ss = 0;
  for (double v : x.values()) ss += (v - m) * (v - m);
  UpdateRunningStats(cache, mean, var);
  EXPECT_NEAR(mean[0], 0.1 * m, 1e-12);
  EXPECT_NEAR(var[0], 0.9 + 0.1 * ss / 29.0, 1e-12);
}

TEST(Decoder, WeakWithinFrameRange) {
  const auto cfg = TinyConfig(4);
  const auto params = InitParams<double>(cfg, 60);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto x = RandomTensor<double>({25, 4}, 61 + s, 3.0);
    const auto out = DecoderForward(params, "main", x);
    for (std::size_t c = 0; c < 4; ++c) {
      double lo = 1, hi = 0;
      for (std::size_t t = 0; t < 25; ++t) {
        const double p = out.strong.at(t, c);
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
      }
      EXPECT_GE(out.weak[c], lo - 1e-15);
      EXPECT_LE(out.weak[c], hi + 1e-15);
    }
  }
}

Tensor<float> RandomFeatures(const ModelConfig& cfg, std::size_t batch, std::size_t frames, std::uint64_t seed) {
  return RandomTensor<float>({batch, cfg.in_channels, frames, cfg.n_bins}, seed);
}

TEST(Model, ShapeLawForAnyClassCount) {
  for (std::size_t c : {1u, 27u}) {
    const auto cfg = NarrowConfig(c);
    const auto params = InitParams<float>(cfg, 70);
    const auto x = RandomFeatures(cfg, 1, 1001, 71);
    const auto out = ModelForward(cfg, params, x, static_cast<const Tensor<float>*>(nullptr), {Mode::kEval, 0});
    EXPECT_EQ(out.main.strong.shape(), (std::vector<std::size_t>{1, 250, c}));
    EXPECT_EQ(out.main.weak.shape(), (std::vector<std::size_t>{1, c}));
    EXPECT_EQ(out.conv_features.shape(), (std::vector<std::size_t>{1, 250, 3}));
    EXPECT_FALSE(out.aux.has_value());
  }
}

TEST(Model, TrainModeHasFourHeads) {
  const auto cfg = TinyConfig();
  const auto params = InitParams<float>(cfg, 72);
  const auto out = ModelForward(cfg, params, RandomFeatures(cfg, 2, 101, 73),
                                static_cast<const Tensor<float>*>(nullptr), {Mode::kTrain, 1});
  ASSERT_TRUE(out.aux.has_value());
  EXPECT_EQ(out.aux->strong.shape(), (std::vector<std::size_t>{2, 25, 3}));
  EXPECT_EQ(out.aux->weak.shape(), (std::vector<std::size_t>{2, 3}));
}

TEST(Model, EvalIsPureAndDropoutOnlyInTraining) {
  const auto cfg = TinyConfig();
  auto params = InitParams<float>(cfg, 74);
  const auto snapshot = params;
  const auto x = RandomFeatures(cfg, 2, 101, 75);
  const Tensor<float>* none = nullptr;
  const auto e1 = ModelForward(cfg, params, x, none, {Mode::kEval, 1});
  const auto e2 = ModelForward(cfg, params, x, none, {Mode::kEval, 2});
  EXPECT_TRUE(e1.main.strong == e2.main.strong);
  const auto t1 = ModelForward(cfg, params, x, none, {Mode::kTrain, 1});
  const auto t1b = ModelForward(cfg, params, x, none, {Mode::kTrain, 1});
  const auto t2 = ModelForward(cfg, params, x, none, {Mode::kTrain, 2});
  EXPECT_TRUE(t1.main.strong == t1b.main.strong);
  EXPECT_FALSE(t1.main.strong == t2.main.strong);
  EXPECT_TRUE(params == snapshot);
}

TEST(Model, AuxCopiedFromMainMatchesBitForBit) {
  const auto cfg = TinyConfig();
  auto params = InitParams<float>(cfg, 76);
  for (auto& e : params.entries()) {
    if (e.name.rfind("aux.", 0) == 0) e.value = params.Get("main." + e.name.substr(4));
  }
  const auto out = ModelForward(cfg, params, RandomFeatures(cfg, 2, 101, 77),
                                static_cast<const Tensor<float>*>(nullptr), {Mode::kTrain, 3});
  EXPECT_TRUE(out.main.strong == out.aux->strong);
  EXPECT_TRUE(out.main.weak == out.aux->weak);
}

TEST(Model, PerturbingAuxLeavesMainUnchanged) {
  const auto cfg = TinyConfig();
  auto params = InitParams<float>(cfg, 78);
  const auto x = RandomFeatures(cfg, 2, 101, 79);
  const Tensor<float>* none = nullptr;
  const auto before = ModelForward(cfg, params, x, none, {Mode::kTrain, 4});
  for (auto& e : params.entries()) {
    if (e.name.rfind("aux.", 0) == 0) {
      for (auto& v : e.value.values()) v += 0.25f;
    }
  }
  const auto after = ModelForward(cfg, params, x, none, {Mode::kTrain, 4});
  EXPECT_TRUE(before.main.strong == after.main.strong);
  EXPECT_FALSE(before.aux->strong == after.aux->strong);
}

TEST(Model, EmbeddingsReachOnlyMainDecoder) {
  auto cfg = TinyConfig();
  cfg.embedding_dim = 2;
  const auto params = InitParams<float>(cfg, 80);
  const auto x = RandomFeatures(cfg, 1, 101, 81);
  auto e1 = RandomTensor<float>({1, 25, 2}, 82);
  auto e2 = RandomTensor<float>({1, 25, 2}, 83);
  const auto a = ModelForward(cfg, params, x, &e1, {Mode::kTrain, 5});
  const auto b = ModelForward(cfg, params, x, &e2, {Mode::kTrain, 5});
  EXPECT_FALSE(a.main.strong == b.main.strong);
  EXPECT_TRUE(a.aux->strong == b.aux->strong);
  Tensor<float> wrong({1, 24, 2});
  EXPECT_THROW(ModelForward(cfg, params, x, &wrong, {Mode::kEval, 0}), Error);
  EXPECT_THROW(ModelForward(cfg, params, x, static_cast<const Tensor<float>*>(nullptr), {Mode::kEval, 0}), Error);
}

TEST(Model, RejectsWrongFeatureShape) {
  const auto cfg = TinyConfig();
  const auto params = InitParams<float>(cfg, 84);
  Tensor<float> x({1, 2, 101, 16});
  EXPECT_THROW(ModelForward(cfg, params, x, static_cast<const Tensor<float>*>(nullptr), {Mode::kEval, 0}), Error);
}

// Loss that touches every head: weighted sums of logits and weak outputs.
struct ProbeLoss {
  Tensor<double> a_main, b_main, a_aux, b_aux;
  double Value(const ForwardOutput<double>& out) const {
    double s = 0;
    for (std::size_t i = 0; i < a_main.size(); ++i) s += a_main[i] * std::sin(out.main.strong_logits[i]);
    for (std::size_t i = 0; i < b_main.size(); ++i) s += b_main[i] * out.main.weak[i] * out.main.weak[i];
    for (std::size_t i = 0; i < a_aux.size(); ++i) s += a_aux[i] * out.aux->strong_logits[i];
    for (std::size_t i = 0; i < b_aux.size(); ++i) s += b_aux[i] * out.aux->weak[i];
    return s;
  }
};

TEST(Model, GradientMatchesFiniteDifferences) {
  const auto cfg = TinyConfig();
  auto params = InitParams<double>(cfg, 90);
  const auto x = RandomTensor<double>({2, 3, 101, 16}, 91);
  const ForwardOptions opts{Mode::kTrain, 92};
  const Tensor<double>* none = nullptr;
  ProbeLoss probe{RandomTensor<double>({2, 25, 3}, 93), RandomTensor<double>({2, 3}, 94),
                  RandomTensor<double>({2, 25, 3}, 95), RandomTensor<double>({2, 3}, 96)};
  Tape<double> tape;
  const auto out = ModelForward(cfg, params, x, none, opts, &tape);
  HeadGrad<double> gm{Tensor<double>({2, 25, 3}), Tensor<double>({2, 3})};
  HeadGrad<double> ga{probe.a_aux, probe.b_aux};
  for (std::size_t i = 0; i < gm.d_strong_logits.size(); ++i) {
    gm.d_strong_logits[i] = probe.a_main[i] * std::cos(out.main.strong_logits[i]);
  }
  for (std::size_t i = 0; i < gm.d_weak.size(); ++i) gm.d_weak[i] = 2 * probe.b_main[i] * out.main.weak[i];
  const auto grads = ModelBackward(cfg, params, tape, gm, &ga);
  const auto res = testing::GradCheck(
      params, grads,
      [&](const ParameterSet<double>& p) { return probe.Value(ModelForward(cfg, p, x, none, opts)); }, 1e-4,
      1e-4, 1e-6, 7);
  EXPECT_GT(res.checked, 100u);
  EXPECT_EQ(res.failures, 0u) << "worst " << res.worst << " rel " << res.max_rel_error;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  auto cfg = TinyConfig();
  cfg.embedding_dim = 3;
  Checkpoint ckpt;
  ckpt.config = cfg;
  ckpt.AddGroup("student", InitParams<float>(cfg, 100));
  ckpt.AddGroup("teacher", InitParams<float>(cfg, 101));
  ckpt.meta = CheckpointMeta{3, 1234, 42, {0.5, 0.25}};
  testing::TempDir dir;
  WriteCheckpoint(dir.path() / "m.sedm", ckpt);
  const auto back = ReadCheckpoint(dir.path() / "m.sedm");
  EXPECT_EQ(back.config, cfg);
  EXPECT_TRUE(back.tensors == ckpt.tensors);
  EXPECT_EQ(back.meta, ckpt.meta);
  EXPECT_TRUE(back.Group("teacher") == InitParams<float>(cfg, 101));
  EXPECT_FALSE(back.Group("teacher").entry(back.Group("teacher").IndexOf("cnn.0.bn.running_mean")).trainable);
  EXPECT_EQ(EncodeCheckpoint(back), EncodeCheckpoint(ckpt));
  EXPECT_THROW(back.Group("adam_m"), Error);
}

TEST(Checkpoint, CorruptionIsDetected) {
  Checkpoint ckpt;
  ckpt.config = TinyConfig();
  ckpt.AddGroup("student", InitParams<float>(ckpt.config, 102));
  auto bytes = EncodeCheckpoint(ckpt);
  bytes[bytes.size() / 2] ^= 0x10;
  try {
    DecodeCheckpoint(bytes, "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kChecksum);
  }
  auto trunc = EncodeCheckpoint(ckpt);
  trunc.resize(trunc.size() - 9);
  EXPECT_THROW(DecodeCheckpoint(trunc, "x"), Error);
  EXPECT_THROW(DecodeCheckpoint(std::vector<std::uint8_t>{'S', 'E'}, "x"), Error);
}

TEST(Embeddings, RoundTripAndAlignment) {
  const auto e = RandomTensor<float>({50, 4}, 110);
  EXPECT_TRUE(DecodeEmbeddings(EncodeEmbeddings(e), "e") == e);
  EXPECT_TRUE(AlignEmbeddings(e, 50) == e);
  Tensor<float> ramp({10, 1});
  for (std::size_t i = 0; i < 10; ++i) ramp[i] = static_cast<float>(i);
  const auto up = AlignEmbeddings(ramp, 20);
  ASSERT_EQ(up.dim(0), 20u);
  // Centres of output frame i sit at (i + 0.5) / 2 - 0.5 on the input grid.
  for (std::size_t i = 1; i < 19; ++i) EXPECT_NEAR(up[i], (i + 0.5) / 2.0 - 0.5, 1e-6);
  EXPECT_FLOAT_EQ(up[0], 0.0f);
  EXPECT_FLOAT_EQ(up[19], 9.0f);
  EXPECT_TRUE(StubEmbeddings(1, "a", 250, 8) == StubEmbeddings(1, "a", 250, 8));
  EXPECT_FALSE(StubEmbeddings(1, "a", 250, 8) == StubEmbeddings(1, "b", 250, 8));
}

}  // namespace
}  // namespace sedkit::model
