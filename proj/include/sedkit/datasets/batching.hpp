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

#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include "sedkit/common/error.hpp"
#include "sedkit/common/random.hpp"

namespace sedkit::datasets {

/// The four loss streams a batch draws from; synthetic and real strong
/// clips share one group.
enum class BatchGroup : std::size_t { kWeak = 0, kUnlabeled = 1, kStrong = 2, kMaestro = 3 };
inline constexpr std::size_t kBatchGroups = 4;

struct BatchComposition {
  std::array<std::size_t, kBatchGroups> quota = {4, 4, 4, 4};

  std::size_t total() const { return std::accumulate(quota.begin(), quota.end(), std::size_t{0}); }
};

struct BatchItem {
  BatchGroup group;
  std::size_t index;  // position within the group

  friend bool operator==(const BatchItem&, const BatchItem&) = default;
};

/// Endless, seed-deterministic stream of batches with a fixed per-group
/// quota. Each group walks its own shuffled order and reshuffles when it
/// runs out; an epoch is as many batches as the largest group needs to be
/// seen once.
class BatchStream {
 public:
  BatchStream(std::array<std::size_t, kBatchGroups> group_sizes, BatchComposition composition,
              std::uint64_t seed)
      : sizes_(group_sizes), composition_(composition), seed_(seed) {
    if (composition_.total() == 0) Fail(ErrorKind::kParameter, "batch composition is empty");
    for (std::size_t g = 0; g < kBatchGroups; ++g) {
      if (composition_.quota[g] > 0 && sizes_[g] == 0) {
        Fail(ErrorKind::kParameter, "batch group {} has quota {} but no examples", g,
             composition_.quota[g]);
      }
      order_[g].resize(sizes_[g]);
      cursor_[g] = sizes_[g];  // forces a shuffle on first use
    }
  }

  std::size_t batches_per_epoch() const {
    std::size_t n = 1;
    for (std::size_t g = 0; g < kBatchGroups; ++g) {
      if (composition_.quota[g] == 0) continue;
      n = std::max(n, (sizes_[g] + composition_.quota[g] - 1) / composition_.quota[g]);
    }
    return n;
  }

  std::vector<BatchItem> Next() {
    std::vector<BatchItem> batch;
    batch.reserve(composition_.total());
    for (std::size_t g = 0; g < kBatchGroups; ++g) {
      for (std::size_t q = 0; q < composition_.quota[g]; ++q) {
        if (cursor_[g] >= sizes_[g]) Reshuffle(g);
        batch.push_back({static_cast<BatchGroup>(g), order_[g][cursor_[g]++]});
      }
    }
    ++produced_;
    return batch;
  }

  /// Advances without materializing batches (used when resuming).
  void Skip(std::uint64_t n) {
    for (std::uint64_t i = 0; i < n; ++i) Next();
  }

  std::uint64_t produced() const { return produced_; }

 private:
  void Reshuffle(std::size_t g) {
    std::iota(order_[g].begin(), order_[g].end(), std::size_t{0});
    Rng rng = DeriveRng(seed_, {0xBA7C4u, g, passes_[g]++});
    Shuffle(order_[g].begin(), order_[g].end(), rng);
    cursor_[g] = 0;
  }

  std::array<std::size_t, kBatchGroups> sizes_;
  BatchComposition composition_;
  std::uint64_t seed_;
  std::array<std::vector<std::size_t>, kBatchGroups> order_;
  std::array<std::size_t, kBatchGroups> cursor_{};
  std::array<std::uint64_t, kBatchGroups> passes_{};
  std::uint64_t produced_ = 0;
};

}  // namespace sedkit::datasets
