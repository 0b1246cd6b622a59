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
#include <sstream>

#include "sedkit/cli/run.hpp"
#include "test_util.hpp"
#include "toy_corpus.hpp"

namespace sedkit::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = Run(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, HelpExitsZero) {
  const auto r = Call({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("featurize"), std::string::npos);
  EXPECT_NE(r.out.find("ensemble"), std::string::npos);
  EXPECT_EQ(Call({"predict", "--help"}).code, 0);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(Call({}).code, 1);
  EXPECT_EQ(Call({"frobnicate"}).code, 1);
  const auto r = Call({"evaluate", "--scores", "a", "--refs", "b", "--bogus"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--bogus"), std::string::npos);
  EXPECT_EQ(Call({"evaluate", "--scores", "a", "--refs", "b", "--kind", "f1"}).code, 1);
}

TEST(Cli, MissingManifestNamesPath) {
  testing::TempDir dir;
  const auto missing = (dir.path() / "nowhere" / "manifest.tsv").string();
  const auto r = Call({"featurize", "--manifest", missing, "--out", (dir.path() / "f").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
}

TEST(Cli, BannerLogsConstantsAndHash) {
  testing::TempDir dir;
  const auto r = Call({"stats", "--manifest", (dir.path() / "m.tsv").string(), "--out", "x"});
  EXPECT_NE(r.err.find("\"dtc\":0.7"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("aux_weight"), std::string::npos);
  EXPECT_NE(r.err.find("config hash"), std::string::npos);
  const auto quiet = Call({"stats", "--manifest", "m.tsv", "--out", "x", "--log-level", "error"});
  EXPECT_EQ(quiet.err.find("design constants"), std::string::npos);
}

/// featurize -> stats -> train -> predict -> evaluate -> ensemble on the toy
/// corpus, checking byte-identical reruns and checksum failures.
TEST(Cli, EndToEndOnToyCorpus) {
  testing::TempDir dir;
  const auto root = dir.path();
  testing::WriteToyCorpus(root / "audio", testing::MakeToyClips(6, 3), "synth_strong");
  const auto p = [&](const char* rel) { return (root / rel).string(); };

  ASSERT_EQ(Call({"featurize", "--manifest", p("audio/manifest.tsv"), "--out", p("feat"), "--jobs", "2"}).code, 0);
  ASSERT_TRUE(std::filesystem::exists(root / "feat" / "toy00.sedf"));
  const auto first_cache = ReadFileBytes(root / "feat" / "toy03.sedf");
  ASSERT_EQ(Call({"featurize", "--manifest", p("audio/manifest.tsv"), "--out", p("feat2")}).code, 0);
  EXPECT_EQ(first_cache, ReadFileBytes(root / "feat2" / "toy03.sedf"));

  ASSERT_EQ(Call({"stats", "--manifest", p("feat/manifest.tsv"), "--out", p("stats.sedn")}).code, 0);

  std::ofstream(root / "train.json") << R"({
    "epochs": 2, "steps_per_epoch": 2, "rampup_epochs": 1, "max_lr": 0.003,
    "batch_composition": {"weak": 0, "unlabeled": 0, "strong": 3, "maestro_soft": 0},
    "model": {"n_classes": 2, "conv_channels": [4, 4], "time_pool": [2, 2], "freq_pool": [8, 16],
              "rnn_hidden": 8, "dropout": 0.1},
    "data": {"features": "feat", "stats": "stats.sedn", "class_map": "audio/classes.txt",
             "strong_labels": ["audio/strong.tsv"], "validation_manifest": "feat/manifest.tsv",
             "validation_strong": "audio/strong.tsv", "validation_soft": "audio/soft.tsv", "out_dir": "run"}
  })";
  const auto train = Call({"train", "--config", p("train.json"), "--data", p("feat/manifest.tsv")});
  ASSERT_EQ(train.code, 0) << train.err;
  EXPECT_NE(train.err.find("teacher psds"), std::string::npos) << train.err;
  EXPECT_TRUE(std::filesystem::exists(root / "run" / "ckpt_epoch002.sedm"));
  EXPECT_TRUE(std::filesystem::exists(root / "run" / "ranking.tsv"));
  EXPECT_TRUE(std::filesystem::exists(root / "run" / "norm_stats.sedn"));

  const auto ck = p("run/ckpt_epoch002.sedm");
  for (const char* out : {"s1.seds", "s2.seds"}) {
    const auto r = Call({"predict", "--checkpoint", ck, "--manifest", p("feat/manifest.tsv"), "--out", p(out)});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(ReadFileBytes(root / "s1.seds"), ReadFileBytes(root / "s2.seds"));
  const auto scores = evaluate::ReadScores(root / "s1.seds");
  ASSERT_EQ(scores.size(), 6u);
  EXPECT_EQ(scores[0].scores.shape(), (std::vector<std::size_t>{250, 2}));

  const auto ev = Call({"evaluate", "--scores", p("s1.seds"), "--refs", p("audio/strong.tsv"), "--soft-refs",
                        p("audio/soft.tsv"), "--class-map", p("audio/classes.txt"), "--json", p("report.json")});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_EQ(ev.out.rfind("psds\tall\t", 0), 0u) << ev.out;
  EXPECT_NE(ev.out.find("mpauc\tall\t"), std::string::npos);
  const auto report = nlohmann::json::parse(ReadTextFile(root / "report.json"));
  EXPECT_GE(report["psds"].get<double>(), 0.0);
  EXPECT_LE(report["mpauc"].get<double>(), 1.0);

  ASSERT_EQ(Call({"predict", "--checkpoint", p("run/ckpt_epoch001.sedm"), "--manifest", p("feat/manifest.tsv"),
                  "--out", p("s3.seds"), "--group", "student"})
                .code,
            0);
  ASSERT_EQ(Call({"ensemble", "--inputs", p("s1.seds"), p("s3.seds"), "--out", p("avg.seds")}).code, 0);
  const auto avg = evaluate::ReadScores(root / "avg.seds");
  const auto other = evaluate::ReadScores(root / "s3.seds");
  EXPECT_NEAR(avg[1].scores[17], 0.5f * (scores[1].scores[17] + other[1].scores[17]), 1e-7);
  const auto top = Call({"ensemble", "--checkpoints", p("run"), "--top-k", "5", "--manifest", p("feat/manifest.tsv"),
                         "--out", p("top.seds")});
  ASSERT_EQ(top.code, 0) << top.err;
  EXPECT_NE(top.err.find("only 2 checkpoints"), std::string::npos) << top.err;

  auto bytes = ReadFileBytes(ck);
  bytes[bytes.size() / 3] ^= 0x01;
  WriteFileBytes(root / "bad.sedm", bytes);
  const auto bad = Call({"predict", "--checkpoint", p("bad.sedm"), "--manifest", p("feat/manifest.tsv"), "--out",
                         p("s4.seds"), "--stats", p("stats.sedn")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("checksum"), std::string::npos) << bad.err;
  EXPECT_NE(bad.err.find("bad.sedm"), std::string::npos) << bad.err;
}

}  // namespace
}  // namespace sedkit::cli
