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

#include "fuzz.hpp"
#include "sedkit/datasets/class_map.hpp"
#include "sedkit/datasets/labels.hpp"
#include "sedkit/datasets/manifest.hpp"
#include "sedkit/evaluate/scores.hpp"
#include "sedkit/featurize/cache.hpp"
#include "sedkit/featurize/wav.hpp"
#include "sedkit/model/checkpoint.hpp"
#include "sedkit/model/embeddings.hpp"
#include "sedkit/training/config.hpp"
#include "train_fixtures.hpp"

namespace sedkit {
namespace {

using testing::FuzzBinary;
using testing::FuzzStats;
using testing::FuzzText;

constexpr std::size_t kIterations = 3000;

void ExpectGraceful(const FuzzStats& st, const char* what) {
  EXPECT_EQ(st.foreign, 0u) << what << ": " << st.first_foreign;
  EXPECT_GT(st.rejected, 0u) << what;
}

datasets::ClassMap SmallMap() {
  return datasets::ParseClassMap("dog = Dog | \nspeech = Speech | people_talking\ncar = | car\n", "map");
}

TEST(Fuzz, StrongTsv) {
  const auto map = SmallMap();
  ExpectGraceful(FuzzText("filename\tonset\toffset\tevent_label\na.wav\t0.5\t3.25\tDog\na.wav\t1\t2\tSpeech\nb.wav\t\t\t\n",
                          kIterations, 1, [&](const std::string& s) { datasets::ParseStrongTsv(s, map, "strong.tsv"); }),
                 "strong");
}

TEST(Fuzz, WeakTsv) {
  const auto map = SmallMap();
  ExpectGraceful(FuzzText("filename\tevent_labels\na.wav\tDog,Speech\nb.wav\tSpeech\n", kIterations, 2,
                          [&](const std::string& s) { datasets::ParseWeakTsv(s, map, "weak.tsv"); }),
                 "weak");
}

TEST(Fuzz, SoftTsv) {
  const auto map = SmallMap();
  ExpectGraceful(FuzzText("filename\tonset\toffset\tevent_label\tconfidence\nm\t0\t3\tcar\t0.75\nm\t2\t9\tpeople_talking\t0.5\n",
                          kIterations, 3, [&](const std::string& s) { datasets::ParseSoftTsv(s, map, "soft.tsv"); }),
                 "soft");
}

TEST(Fuzz, ManifestClassMapAndConfig) {
  ExpectGraceful(FuzzText("clip_id\tpath\tsource\na\ta.wav\tweak\nb\tsub/b.wav\tmaestro_soft\n", kIterations, 4,
                          [](const std::string& s) { datasets::ParseManifest(s, "/tmp", "m.tsv"); }),
                 "manifest");
  ExpectGraceful(FuzzText("dog = Dog | \nspeech = Speech | people_talking\ncar = | car\n", kIterations, 5,
                          [](const std::string& s) { datasets::ParseClassMap(s, "map"); }),
                 "class map");
  ExpectGraceful(FuzzText(R"({"epochs": 3, "seed": 7, "model": {"n_classes": 3, "dropout": 0.2}, "data": {"features": "f"}})",
                          kIterations, 6, [](const std::string& s) { training::ParseTrainConfig(s, "/tmp", "c.json"); }),
                 "train config");
}

TEST(Fuzz, Wav) {
  std::vector<float> x(400);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(std::sin(0.05 * static_cast<double>(i)) * 0.5);
  for (auto enc : {featurize::WavEncoding::kPcm16, featurize::WavEncoding::kFloat32}) {
    const auto bytes = featurize::EncodeWav({x, x}, 22050, enc);
    ExpectGraceful(FuzzBinary(bytes, kIterations, 7, [](const auto& b) { featurize::DecodeWav(b, "x.wav"); }), "wav");
  }
}

TEST(Fuzz, FeatureCacheAndStats) {
  featurize::FeatureTensor t;
  t.data = testing::Gaussian<float>({3, 20, 8}, 1);
  ExpectGraceful(FuzzBinary(featurize::EncodeFeatureTensor(t), kIterations, 8,
                            [](const auto& b) { featurize::DecodeFeatureTensor(b, "x.sedf"); }),
                 "features");
  featurize::NormStats s{{0.1, -2.0, 3.0}, {1.0, 0.5, 2.0}};
  ExpectGraceful(FuzzBinary(featurize::EncodeNormStats(s), kIterations, 9,
                            [](const auto& b) { featurize::DecodeNormStats(b, "x.sedn"); }),
                 "stats");
}

TEST(Fuzz, Checkpoint) {
  model::Checkpoint ck;
  ck.config = testing::ReducedModel();
  ck.AddGroup("student", model::InitParams<float>(ck.config, 1));
  ck.meta = model::CheckpointMeta{3, 30, 42, {0.1, 0.2, 0.3, 0.4}};
  ExpectGraceful(FuzzBinary(model::EncodeCheckpoint(ck), kIterations, 10,
                            [](const auto& b) { model::DecodeCheckpoint(b, "x.sedm"); }, true),
                 "checkpoint");
}

TEST(Fuzz, ScoresAndEmbeddings) {
  std::vector<evaluate::ScoreRecord> recs = {{"a", Tensor<float>({25, 3}, std::vector<float>(75, 0.25f))},
                                             {"bb", Tensor<float>({25, 3}, std::vector<float>(75, 0.5f))}};
  ExpectGraceful(FuzzBinary(evaluate::EncodeScores(recs), kIterations, 11,
                            [](const auto& b) { evaluate::DecodeScores(b, "x.seds"); }),
                 "scores");
  ExpectGraceful(FuzzBinary(model::EncodeEmbeddings(testing::Gaussian<float>({12, 4}, 3)), kIterations, 12,
                            [](const auto& b) { model::DecodeEmbeddings(b, "x.sede"); }),
                 "embeddings");
}

}  // namespace
}  // namespace sedkit
