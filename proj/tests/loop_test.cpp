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

#include <fstream>

#include "sedkit/common/binary_io.hpp"
#include "sedkit/training/loop.hpp"
#include "test_util.hpp"
#include "train_fixtures.hpp"

namespace sedkit::training {
namespace {

void WriteText(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

/// Small on-disk corpus: random feature caches, every label regime, a
/// three-class map and a validation split.
class LoopTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto& root = dir_.path();
    std::filesystem::create_directories(root / "features");
    WriteText(root / "classes.txt", "dog = Dog | \nspeech = Speech | people_talking\ncar = | car\n");
    struct Clip {
      const char* id;
      const char* source;
    };
    const std::vector<Clip> train = {{"w1", "weak"},         {"w2", "weak"},         {"u1", "unlabeled"},
                                     {"u2", "unlabeled"},    {"s1", "synth_strong"}, {"s2", "real_strong"},
                                     {"m1@0", "maestro_soft"}, {"m1@3", "maestro_soft"}};
    const std::vector<Clip> valid = {{"v1", "eval"}, {"v2", "eval"}, {"m2@0", "eval"}};
    std::string manifest = "clip_id\tpath\tsource\n";
    std::uint64_t seed = 1;
    auto feature = [&](const std::string& id) {
      featurize::FeatureTensor t;
      t.data = sedkit::testing::Gaussian<float>({3, 1001, 16}, seed++, 2.0);
      featurize::WriteFeatureCache(root / "features" / (id + ".sedf"), t);
    };
    for (const auto& c : train) {
      feature(c.id);
      manifest += fmt::format("{}\t{}.wav\t{}\n", c.id, c.id, c.source);
    }
    WriteText(root / "train.tsv", manifest);
    manifest = "clip_id\tpath\tsource\n";
    for (const auto& c : valid) {
      feature(c.id);
      manifest += fmt::format("{}\t{}.wav\t{}\n", c.id, c.id, c.source);
    }
    WriteText(root / "valid.tsv", manifest);
    WriteText(root / "strong.tsv",
              "filename\tonset\toffset\tevent_label\n"
              "s1\t0.5\t3.0\tDog\ns1\t2.0\t6.0\tSpeech\ns2\t\t\t\n"
              "v1\t1.0\t4.0\tDog\nv2\t0.0\t10.0\tSpeech\n");
    WriteText(root / "weak.tsv", "filename\tevent_labels\nw1\tDog,Speech\nw2\t\n");
    WriteText(root / "soft.tsv",
              "filename\tonset\toffset\tevent_label\tconfidence\n"
              "m1\t0\t5\tcar\t0.9\nm1\t5\t13\tpeople_talking\t0.7\n"
              "m2\t0\t4\tcar\t0.8\nm2\t4\t10\tpeople_talking\t0.6\nm2\t6\t10\tcar\t0.2\n");
    WriteText(root / "config.json", R"({
      "epochs": 3, "steps_per_epoch": 2, "rampup_epochs": 2, "seed": 7,
      "batch_composition": {"weak": 1, "unlabeled": 1, "strong": 1, "maestro_soft": 1},
      "model": {"n_classes": 3, "n_bins": 16, "conv_channels": [4, 4], "time_pool": [2, 2],
                "freq_pool": [4, 4], "rnn_hidden": 8, "dropout": 0.2},
      "data": {"features": "features", "class_map": "classes.txt", "strong_labels": ["strong.tsv"],
               "weak_labels": "weak.tsv", "soft_labels": "soft.tsv", "validation_manifest": "valid.tsv",
               "validation_strong": "strong.tsv", "validation_soft": "soft.tsv", "out_dir": "run"}
    })");
  }

  TrainConfig Config() const { return ReadTrainConfig(dir_.path() / "config.json"); }

  Corpus LoadTrain(const TrainConfig& cfg) const {
    return LoadCorpus(cfg, datasets::ReadManifest(dir_.path() / "train.tsv"));
  }

  sedkit::testing::TempDir dir_;
};

TEST_F(LoopTest, CorpusCarriesLabelsAndMasks) {
  const auto cfg = Config();
  const auto c = LoadTrain(cfg);
  ASSERT_EQ(c.examples.size(), 8u);
  EXPECT_EQ(c.groups[0].size(), 2u);
  EXPECT_EQ(c.groups[2].size(), 2u);
  EXPECT_EQ(c.groups[3].size(), 2u);
  const auto& s1 = c.examples[4];
  EXPECT_EQ(s1.clip_id, "s1");
  EXPECT_EQ(s1.strong.at(12, 0), 1.0f);  // 0.48 s: before the event
  EXPECT_EQ(s1.strong.at(11, 0), 0.0f);
  EXPECT_EQ(s1.strong.at(100, 1), 1.0f);
  EXPECT_EQ(s1.mask.values()[2], 0.0f);
  EXPECT_EQ(c.examples[0].weak.values()[1], 1.0f);
  // Crop 3 of m1 starts at second 3: rows 0-1 car, 2-9 people_talking.
  const auto& m = c.examples[7];
  EXPECT_EQ(m.clip_id, "m1@3");
  EXPECT_FLOAT_EQ(m.soft.at(1, 2), 0.9f);
  EXPECT_FLOAT_EQ(m.soft.at(2, 2), 0.0f);
  EXPECT_FLOAT_EQ(m.soft.at(2, 1), 0.7f);
  EXPECT_EQ(m.mask.values()[0], 0.0f);
  // Normalized with statistics of the training set.
  double sum = 0;
  for (const auto& e : c.examples)
    for (std::size_t i = 0; i < 1001 * 16; ++i) sum += e.features[i];
  EXPECT_NEAR(sum / (8.0 * 1001 * 16), 0.0, 1e-4);
}

TEST_F(LoopTest, MissingLabelsNamed) {
  WriteText(dir_.path() / "weak.tsv", "filename\tevent_labels\nw1\tDog\n");
  try {
    LoadTrain(Config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLabel);
    EXPECT_NE(std::string(e.what()).find("w2"), std::string::npos);
  }
}

TEST_F(LoopTest, ZeroEpochsWritesInitialCheckpointOnly) {
  auto cfg = Config();
  cfg.epochs = 0;
  const auto corpus = LoadTrain(cfg);
  const auto reports = TrainLoop(cfg, corpus, nullptr);
  ASSERT_EQ(reports.size(), 1u);
  std::vector<std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(cfg.data.out_dir)) files.push_back(e.path().filename());
  EXPECT_EQ(files, std::vector<std::string>{"ckpt_epoch000.sedm"});
  const auto ck = model::ReadCheckpoint(cfg.data.out_dir / "ckpt_epoch000.sedm");
  EXPECT_EQ(ck.Group("student"), model::InitParams<float>(cfg.model, cfg.seed));
  EXPECT_EQ(ck.meta->step, 0u);
}

TEST_F(LoopTest, MetadataParsesBack) {
  const auto cfg = Config();
  const auto corpus = LoadTrain(cfg);
  const auto val = LoadValidation(cfg, corpus.stats, corpus.class_map);
  ASSERT_EQ(val.strong.size(), 2u);
  ASSERT_EQ(val.soft.size(), 1u);
  const auto reports = TrainLoop(cfg, corpus, &val);
  ASSERT_EQ(reports.size(), 4u);
  for (const auto& r : reports) {
    const auto ck = model::ReadCheckpoint(r.checkpoint);
    ASSERT_TRUE(ck.meta);
    EXPECT_EQ(ck.meta->epoch, r.epoch);
    EXPECT_EQ(ck.meta->step, r.epoch * 2);
    EXPECT_EQ(ck.meta->seed, 7u);
    EXPECT_EQ(ck.meta->scores, r.scores);
    ASSERT_EQ(r.scores.size(), 4u);
    for (double s : r.scores) {
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 1.0);
    }
  }
  EXPECT_TRUE(std::isfinite(reports.back().mean_loss.total));
  EXPECT_GT(reports.back().mean_loss.total, 0.0);
}

TEST_F(LoopTest, ResumeMatchesUninterruptedRun) {
  auto cfg = Config();
  const auto corpus = LoadTrain(cfg);
  cfg.data.out_dir = dir_.path() / "full";
  TrainLoop(cfg, corpus, nullptr);
  cfg.data.out_dir = dir_.path() / "split";
  LoopOptions first;
  first.stop_after = 1;
  TrainLoop(cfg, corpus, nullptr, first);
  EXPECT_FALSE(std::filesystem::exists(cfg.data.out_dir / "ckpt_epoch002.sedm"));
  LoopOptions second;
  second.resume = cfg.data.out_dir / "ckpt_epoch001.sedm";
  const auto rest = TrainLoop(cfg, corpus, nullptr, second);
  ASSERT_EQ(rest.size(), 2u);
  for (const char* name : {"ckpt_epoch001.sedm", "ckpt_epoch002.sedm", "ckpt_epoch003.sedm"}) {
    EXPECT_EQ(ReadFileBytes(dir_.path() / "full" / name), ReadFileBytes(dir_.path() / "split" / name)) << name;
  }
  const auto ck = model::ReadCheckpoint(dir_.path() / "full" / "ckpt_epoch003.sedm");
  EXPECT_NE(ck.Group("student"), ck.Group("teacher"));
  EXPECT_EQ(ck.Group("adam_m", true).entries().size(), MomentsLike(ck.Group("student")).entries().size());
}

TEST_F(LoopTest, CorruptedResumeRejected) {
  auto cfg = Config();
  cfg.epochs = 1;
  cfg.rampup_epochs = 1;
  const auto corpus = LoadTrain(cfg);
  TrainLoop(cfg, corpus, nullptr);
  const auto path = cfg.data.out_dir / "ckpt_epoch001.sedm";
  auto bytes = ReadFileBytes(path);
  bytes[bytes.size() / 2] ^= 0x40;
  WriteFileBytes(path, bytes);
  LoopOptions o;
  o.resume = path;
  try {
    TrainLoop(cfg, corpus, nullptr, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kChecksum);
  }
}

TEST_F(LoopTest, RunsAreByteIdentical) {
  auto cfg = Config();
  cfg.epochs = 1;
  cfg.rampup_epochs = 1;
  const auto corpus = LoadTrain(cfg);
  cfg.data.out_dir = dir_.path() / "a";
  TrainLoop(cfg, corpus, nullptr);
  cfg.data.out_dir = dir_.path() / "b";
  TrainLoop(cfg, corpus, nullptr);
  EXPECT_EQ(ReadFileBytes(dir_.path() / "a" / "ckpt_epoch001.sedm"), ReadFileBytes(dir_.path() / "b" / "ckpt_epoch001.sedm"));
}

}  // namespace
}  // namespace sedkit::training
