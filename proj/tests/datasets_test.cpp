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

#include "sedkit/common/random.hpp"
#include "sedkit/datasets/batching.hpp"
#include "sedkit/datasets/class_map.hpp"
#include "sedkit/datasets/crop.hpp"
#include "sedkit/datasets/labels.hpp"
#include "sedkit/datasets/manifest.hpp"
#include "test_util.hpp"

namespace sedkit::datasets {
namespace {

std::vector<std::string> MaestroNames() {
  std::vector<std::string> names;
  for (int i = 0; i < 15; ++i) names.push_back("m" + std::to_string(i));
  names.push_back("people_talking");
  names.push_back("cutlery_and_dishes");
  return names;
}

ClassMap PaperMap() {
  return BuildClassMap(DesedClassNames(), MaestroNames(),
                       {{"Speech", "people_talking"}, {"Dishes", "cutlery_and_dishes"}});
}

TEST(ClassMap, TwoMergesGive25) {
  const auto map = PaperMap();
  EXPECT_EQ(map.size(), 25u);
  const int speech = *map.FindUnified("Speech");
  EXPECT_TRUE(map.desed_visible(speech));
  EXPECT_TRUE(map.maestro_visible(speech));
  EXPECT_EQ(map.Resolve("people_talking", Vocabulary::kMaestro), speech);
  // DESED block first and sorted.
  for (std::size_t i = 0; i + 1 < 10; ++i) EXPECT_LT(map.name(i), map.name(i + 1));
  for (std::size_t i = 0; i < 10; ++i) EXPECT_TRUE(map.desed_visible(i));
  for (std::size_t i = 10; i < 25; ++i) EXPECT_FALSE(map.desed_visible(i));
}

TEST(ClassMap, NoMergesGives27DisjointMasks) {
  const auto map = BuildClassMap(DesedClassNames(), MaestroNames(), {});
  EXPECT_EQ(map.size(), 27u);
  const auto d = map.Mask(Vocabulary::kDesed), m = map.Mask(Vocabulary::kMaestro);
  for (std::size_t i = 0; i < 27; ++i) EXPECT_NE(d[i], m[i]);
}

TEST(ClassMap, UnknownMergeIsVocabularyError) {
  try {
    BuildClassMap(DesedClassNames(), MaestroNames(), {{"Speech", "nope"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kVocabulary);
    EXPECT_NE(std::string(e.what()).find("nope"), std::string::npos);
  }
}

TEST(ClassMap, SerializedFormRoundTrips) {
  const auto map = PaperMap();
  const auto back = ParseClassMap(map.Serialize(), "mem");
  EXPECT_TRUE(back == map);
  EXPECT_EQ(back.Serialize(), map.Serialize());
}

TEST(ClassMap, FileSyntax) {
  const auto map = ParseClassMap(
      "# comment\nSpeech = Speech | people talking\nDog = Dog |\ncar = | car\n", "f");
  EXPECT_EQ(map.size(), 3u);
  EXPECT_EQ(map.name(0), "Dog");
  EXPECT_EQ(map.name(2), "car");
  EXPECT_EQ(map.Resolve("people talking", Vocabulary::kMaestro), 1);
  EXPECT_THROW(ParseClassMap("Speech Speech\n", "f"), Error);
}

TEST(StrongTsv, ParsesAndGroups) {
  const auto map = PaperMap();
  const auto labels = ParseStrongTsv(
      "filename\tonset\toffset\tevent_label\na.wav\t1.0\t2.0\tSpeech\nb.wav\t\t\t\n", map, "s");
  ASSERT_EQ(labels.size(), 2u);
  ASSERT_EQ(labels.at("a.wav").events.size(), 1u);
  EXPECT_EQ(labels.at("a.wav").events[0].class_id, *map.FindUnified("Speech"));
  EXPECT_TRUE(labels.at("b.wav").events.empty());
  EXPECT_TRUE(ParseStrongTsv("filename\tonset\toffset\tevent_label\n", map, "s").empty());
}

TEST(StrongTsv, ErrorsNameRowOrClass) {
  const auto map = PaperMap();
  try {
    ParseStrongTsv("filename\tonset\toffset\tevent_label\na.wav\t1\t2\tSpeech\na.wav\t3\t2\tDog\n",
                   map, "s");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLabel);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
  try {
    ParseStrongTsv("filename\tonset\toffset\tevent_label\na.wav\t1\t2\tUnicorn\n", map, "s");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kVocabulary);
    EXPECT_NE(std::string(e.what()).find("Unicorn"), std::string::npos);
  }
}

TEST(WeakTsv, SetsCollapseDuplicates) {
  const auto map = PaperMap();
  const auto labels =
      ParseWeakTsv("filename\tevent_labels\na.wav\tSpeech,Dog,Speech\n", map, "w");
  const std::set<int> expected = {*map.FindUnified("Speech"), *map.FindUnified("Dog")};
  EXPECT_EQ(labels.at("a.wav").present_classes, expected);
  EXPECT_THROW(ParseWeakTsv("filename\tevent_labels\na.wav\tPony\n", map, "w"), Error);
}

constexpr const char* kSoftHeader = "filename\tonset\toffset\tevent_label\tconfidence\n";

TEST(SoftTsv, MergedColumnAndMaxOfDuplicates) {
  const auto map = PaperMap();
  const auto labels = ParseSoftTsv(std::string(kSoftHeader) +
                                       "m.wav\t3\t4\tpeople_talking\t0.8\n"
                                       "m.wav\t3\t4\tpeople_talking\t0.3\n"
                                       "m.wav\t0\t2\tm3\t0.4\n",
                                   map, "soft");
  const auto& seg = labels.at("m.wav").segments;
  const auto speech = static_cast<std::size_t>(*map.FindUnified("Speech"));
  EXPECT_EQ(seg.dim(0), 4u);
  EXPECT_FLOAT_EQ(seg.at(3, speech), 0.8f);
  EXPECT_FLOAT_EQ(seg.at(2, speech), 0.0f);
  const auto m3 = static_cast<std::size_t>(map.Resolve("m3", Vocabulary::kMaestro));
  EXPECT_FLOAT_EQ(seg.at(0, m3), 0.4f);
  EXPECT_FLOAT_EQ(seg.at(1, m3), 0.4f);
}

TEST(SoftTsv, RejectsFractionalBoundariesAndBadConfidence) {
  const auto map = PaperMap();
  EXPECT_THROW(ParseSoftTsv(std::string(kSoftHeader) + "m.wav\t3.5\t4\tm1\t0.8\n", map, "s"), Error);
  EXPECT_THROW(ParseSoftTsv(std::string(kSoftHeader) + "m.wav\t3\t4\tm1\t1.2\n", map, "s"), Error);
  // DESED-only classes are not visible to MAESTRO files.
  EXPECT_THROW(ParseSoftTsv(std::string(kSoftHeader) + "m.wav\t3\t4\tDog\t0.5\n", map, "s"), Error);
}

TEST(SoftLabels, MissingClipIsZeroMatrix) {
  SoftLabelSet none;
  const auto z = none.Resized(10, 25);
  EXPECT_EQ(z.segments.shape(), (std::vector<std::size_t>{10, 25}));
  for (float v : z.segments.values()) EXPECT_EQ(v, 0.0f);
}

TEST(EncodeStrong, OneSecondEventCovers25Frames) {
  StrongLabelSet s{{{2, 1.0, 2.0}}};
  const auto g = EncodeStrong(s, 3);
  for (std::size_t f = 0; f < 250; ++f) {
    EXPECT_EQ(g.at(f, 2), (f >= 25 && f <= 49) ? 1.0f : 0.0f) << f;
    EXPECT_EQ(g.at(f, 0), 0.0f);
  }
  StrongLabelSet full{{{0, 0.0, 10.0}}};
  const auto gf = EncodeStrong(full, 1);
  for (std::size_t f = 0; f < 250; ++f) EXPECT_EQ(gf.at(f, 0), 1.0f);
  const auto empty = EncodeStrong({}, 4);
  for (float v : empty.values()) EXPECT_EQ(v, 0.0f);
}

StrongLabelSet RandomEvents(Rng& rng, double duration, std::size_t classes, int n) {
  StrongLabelSet s;
  for (int i = 0; i < n; ++i) {
    const double on = std::round(UniformRange(rng, 0, duration - 0.5) * 100) / 100;
    const double off = std::min(duration, on + std::round(UniformRange(rng, 0.05, 4) * 100) / 100);
    s.events.push_back({static_cast<int>(UniformInt(rng, 0, classes - 1)), on, off});
  }
  return s;
}

TEST(EncodeStrong, MonotoneInEvents) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = RandomEvents(rng, 10, 4, 5);
    const auto before = EncodeStrong(s, 4);
    s.events.push_back(RandomEvents(rng, 10, 4, 1).events[0]);
    const auto after = EncodeStrong(s, 4);
    for (std::size_t i = 0; i < before.size(); ++i) ASSERT_GE(after[i], before[i]);
  }
}

TEST(EncodeStrong, CommutesWithCropping) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = RandomEvents(rng, 20, 3, 6);
    const auto whole = EncodeStrong(s, 3, 500);
    for (std::size_t k = 0; k <= 10; ++k) {
      StrongLabelSet shifted;
      for (auto e : s.events) {
        e.onset_s -= static_cast<double>(k);
        e.offset_s -= static_cast<double>(k);
        if (e.offset_s <= 0.0 || e.onset_s >= 10.0) continue;
        shifted.events.push_back(e);
      }
      const auto crop = EncodeStrong(shifted, 3);
      for (std::size_t f = 0; f < 250; ++f)
        for (std::size_t c = 0; c < 3; ++c) ASSERT_EQ(crop.at(f, c), whole.at(25 * k + f, c));
    }
  }
}

TEST(Crop, LongClipCountAndAlignment) {
  featurize::AudioClip clip;
  clip.samples.resize(180 * 16000);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) clip.samples[i] = static_cast<float>(i % 977) / 977.0f;
  SoftLabelSet soft;
  soft.segments = Tensor<float>({180, 2});
  for (std::size_t s = 0; s < 180; ++s) soft.segments.at(s, 0) = static_cast<float>(s) / 180.0f;
  const auto crops = CropClip(clip, soft, 2);
  ASSERT_EQ(crops.size(), 171u);
  for (std::size_t k = 0; k < crops.size(); ++k) {
    EXPECT_EQ(crops[k].second.segments.at(0, 0), soft.segments.at(k, 0));
    EXPECT_EQ(crops[k].first.samples.size(), 160000u);
    EXPECT_EQ(crops[k].first.samples[0], clip.samples[k * 16000]);
  }
  EXPECT_EQ(CropCount(180.0), 171u);
  EXPECT_EQ(CropCount(37.0), 28u);
}

TEST(Crop, TenSecondClipIsSingleIdenticalCrop) {
  featurize::AudioClip clip;
  clip.samples.assign(160000, 0.25f);
  SoftLabelSet soft;
  soft.segments = Tensor<float>({10, 1}, 0.5f);
  const auto crops = CropClip(clip, soft, 1);
  ASSERT_EQ(crops.size(), 1u);
  EXPECT_EQ(crops[0].first.samples, clip.samples);
  EXPECT_EQ(crops[0].second.segments, soft.segments);
}

TEST(Crop, ShortClipIsPadded) {
  featurize::AudioClip clip;
  clip.samples.assign(16000 * 4, 0.25f);
  SoftLabelSet soft;
  soft.segments = Tensor<float>({4, 1}, 0.5f);
  const auto crops = CropClip(clip, soft, 1);
  ASSERT_EQ(crops.size(), 1u);
  EXPECT_EQ(crops[0].first.samples.size(), 160000u);
  EXPECT_EQ(crops[0].second.segments.at(3, 0), 0.5f);
  EXPECT_EQ(crops[0].second.segments.at(4, 0), 0.0f);
}

TEST(Manifest, ResolvesRelativePaths) {
  const auto m = ParseManifest("clip_id\tpath\tsource\na\taudio/a.wav\tweak\nb\t/abs/b.wav\tmaestro_soft\n",
                               "/data", "m.tsv");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].path, std::filesystem::path("/data/audio/a.wav"));
  EXPECT_EQ(m[1].source, Source::kMaestroSoft);
  EXPECT_THROW(ParseManifest("a\tb\tnonsense\n", "/", "m"), Error);
  EXPECT_THROW(ReadManifest("/no/such/manifest.tsv"), Error);
}

TEST(Batching, SeedDeterministicWithExactQuotas) {
  BatchStream a({10, 20, 7, 5}, {}, 42), b({10, 20, 7, 5}, {}, 42);
  EXPECT_EQ(a.batches_per_epoch(), 5u);
  for (int i = 0; i < 30; ++i) {
    const auto x = a.Next(), y = b.Next();
    ASSERT_EQ(x, y);
    ASSERT_EQ(x.size(), 16u);
    std::array<int, 4> counts{};
    for (const auto& item : x) ++counts[static_cast<std::size_t>(item.group)];
    EXPECT_EQ(counts, (std::array<int, 4>{4, 4, 4, 4}));
  }
  BatchStream c({10, 20, 7, 5}, {}, 43);
  bool differs = false;
  BatchStream d({10, 20, 7, 5}, {}, 42);
  for (int i = 0; i < 5; ++i) differs |= !(c.Next() == d.Next());
  EXPECT_TRUE(differs);
}

TEST(Batching, EveryExampleSeenOncePerPass) {
  BatchStream s({8, 8, 8, 8}, {}, 1);
  std::array<std::set<std::size_t>, 4> seen;
  for (std::size_t i = 0; i < s.batches_per_epoch(); ++i) {
    for (const auto& item : s.Next()) seen[static_cast<std::size_t>(item.group)].insert(item.index);
  }
  for (const auto& g : seen) EXPECT_EQ(g.size(), 8u);
}

TEST(Batching, SingletonSourcesCycle) {
  BatchStream s({1, 1, 1, 1}, {{1, 1, 1, 1}}, 7);
  EXPECT_EQ(s.batches_per_epoch(), 1u);
  const std::vector<BatchItem> expected = {{BatchGroup::kWeak, 0}, {BatchGroup::kUnlabeled, 0},
                                           {BatchGroup::kStrong, 0}, {BatchGroup::kMaestro, 0}};
  for (int epoch = 0; epoch < 3; ++epoch) EXPECT_EQ(s.Next(), expected);
}

TEST(Batching, EmptyGroupWithQuotaIsError) {
  EXPECT_THROW(BatchStream({0, 1, 1, 1}, {}, 1), Error);
  BatchStream ok({0, 0, 3, 0}, {{0, 0, 2, 0}}, 1);
  EXPECT_EQ(ok.batches_per_epoch(), 2u);
}

}  // namespace
}  // namespace sedkit::datasets
