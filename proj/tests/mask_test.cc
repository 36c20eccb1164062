/*
 * Copyright 2026 The Nuclei Curation Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "nuclei_curation/mask.h"

#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "nuclei_curation/error.h"
#include "test_util.h"

namespace nuclei_curation {
namespace {

using testing::MaskFromRows;
using testing::RandomMask;

Raster LabelRaster(int w, int h, std::vector<std::uint16_t> samples) {
  return Raster{w, h, 16, 1, std::move(samples)};
}

std::uint64_t NonzeroCount(const InstanceMask& mask) {
  return static_cast<std::uint64_t>(
      std::count_if(mask.labels.begin(), mask.labels.end(),
                    [](InstanceId v) { return v != 0; }));
}

TEST(DecodeLabelMapTest, CopiesLabels) {
  const InstanceMask mask = DecodeLabelMap(LabelRaster(2, 2, {0, 1, 1, 0}), 2, 2);
  EXPECT_EQ(InstanceIds(mask), std::vector<InstanceId>{1});
  const auto stats = ComputeInstanceStats(mask);
  ASSERT_EQ(stats.size(), 1u);
  EXPECT_EQ(stats[0].area, 2u);
}

TEST(DecodeLabelMapTest, AllZeroHasNoInstances) {
  const InstanceMask mask =
      DecodeLabelMap(LabelRaster(4, 4, std::vector<std::uint16_t>(16, 0)), 4, 4);
  EXPECT_TRUE(InstanceIds(mask).empty());
}

TEST(DecodeLabelMapTest, InterleavedIds) {
  const InstanceMask mask =
      DecodeLabelMap(LabelRaster(3, 3, {1, 2, 1, 2, 0, 2, 1, 2, 1}), 3, 3);
  EXPECT_EQ(InstanceIds(mask), (std::vector<InstanceId>{1, 2}));
  std::uint64_t total = 0;
  for (const auto& s : ComputeInstanceStats(mask)) total += s.area;
  EXPECT_EQ(total, 8u);
}

TEST(InstanceIdsTest, SmallAndLargeMasksAgreeWithSet) {
  Rng rng(17);
  for (int side : {1, 7, 63, 64, 65, 200}) {
    for (int trial = 0; trial < 5; ++trial) {
      const InstanceMask mask = RandomMask(rng, side, side, 12);
      const std::set<InstanceId> expected = [&] {
        std::set<InstanceId> ids(mask.labels.begin(), mask.labels.end());
        ids.erase(0);
        return ids;
      }();
      EXPECT_EQ(InstanceIds(mask), std::vector<InstanceId>(expected.begin(), expected.end()))
          << side;
    }
  }
}

TEST(DecodeLabelMapTest, RejectsWrongShapeOrDepth) {
  EXPECT_THROW(DecodeLabelMap(LabelRaster(2, 2, {0, 0, 0, 0}), 2, 3), Error);
  Raster eight_bit{2, 2, 8, 1, {0, 0, 0, 0}};
  EXPECT_THROW(DecodeLabelMap(eight_bit, 2, 2), Error);
  Raster rgb{1, 1, 16, 3, {0, 0, 0}};
  EXPECT_THROW(DecodeLabelMap(rgb, 1, 1), Error);
}

TEST(RleTest, EncodesRunsPerInstance) {
  const RleDocument doc = EncodeRle(MaskFromRows({{1, 1, 0, 1}}));
  ASSERT_EQ(doc.instances.size(), 1u);
  EXPECT_EQ(doc.instances[0].id, 1);
  EXPECT_EQ(doc.instances[0].runs, (std::vector<RleRun>{{0, 2}, {3, 1}}));
}

TEST(RleTest, EmptyMaskHasNoInstances) {
  const RleDocument doc = EncodeRle(InstanceMask(5, 3));
  EXPECT_EQ(doc.width, 5);
  EXPECT_EQ(doc.height, 3);
  EXPECT_TRUE(doc.instances.empty());
  EXPECT_EQ(DecodeRle(doc), InstanceMask(5, 3));
}

TEST(RleTest, RunsCrossRowBoundaries) {
  const InstanceMask mask = MaskFromRows({{0, 2}, {2, 0}});
  const RleDocument doc = EncodeRle(mask);
  EXPECT_EQ(doc.instances[0].runs, (std::vector<RleRun>{{1, 2}}));
  EXPECT_EQ(DecodeRle(doc), mask);
}

TEST(RleTest, RoundTripRandom64x64) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const InstanceMask mask = RandomMask(rng, 64, 64, 40);
    EXPECT_EQ(DecodeRle(EncodeRle(mask)), mask);
  }
}

TEST(RleTest, InstancesSortedById) {
  const RleDocument doc = EncodeRle(MaskFromRows({{9, 3, 7}}));
  ASSERT_EQ(doc.instances.size(), 3u);
  EXPECT_EQ(doc.instances[0].id, 3);
  EXPECT_EQ(doc.instances[1].id, 7);
  EXPECT_EQ(doc.instances[2].id, 9);
}

TEST(RleTest, DecodeRejectsMalformedDocuments) {
  const auto decode = [](RleDocument doc) { return DecodeRle(doc); };
  // Overlap across instances.
  EXPECT_THROW(decode({2, 2, {{1, {{0, 2}}}, {2, {{1, 1}}}}}), Error);
  // Overlap within an instance.
  EXPECT_THROW(decode({2, 2, {{1, {{0, 2}, {1, 1}}}}}), Error);
  // Unsorted.
  EXPECT_THROW(decode({2, 2, {{1, {{2, 1}, {0, 1}}}}}), Error);
  // Out of bounds.
  EXPECT_THROW(decode({2, 2, {{1, {{3, 2}}}}}), Error);
  EXPECT_THROW(decode({2, 2, {{1, {{4, 1}}}}}), Error);
  // Zero length, id 0, repeated id, no runs.
  EXPECT_THROW(decode({2, 2, {{1, {{0, 0}}}}}), Error);
  EXPECT_THROW(decode({2, 2, {{0, {{0, 1}}}}}), Error);
  EXPECT_THROW(decode({2, 2, {{1, {{0, 1}}}, {1, {{2, 1}}}}}), Error);
  EXPECT_THROW(decode({2, 2, {{1, {}}}}), Error);
  // Bad geometry.
  EXPECT_THROW(decode({0, 2, {}}), Error);
}

TEST(RleTest, AdjacentRunsOfOneInstanceAreAccepted) {
  const InstanceMask mask = DecodeRle({1, 4, {{1, {{0, 1}, {1, 1}}}}});
  EXPECT_EQ(mask, MaskFromRows({{1}, {1}, {0}, {0}}));
}

TEST(ValidateTest, ValidSingleInstance) {
  EXPECT_TRUE(Validate(MaskFromRows({{0, 1}, {1, 1}})).empty());
}

TEST(ValidateTest, SplitInstanceWarnsOnce) {
  const InstanceMask mask = MaskFromRows({
      {5, 5, 0, 0},
      {5, 5, 0, 0},
      {0, 0, 0, 5},
      {0, 0, 5, 5},
  });
  const auto findings = Validate(mask);
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].severity, Severity::kWarning);
  EXPECT_EQ(findings[0].code, "non_contiguous");
  EXPECT_EQ(findings[0].id, std::optional<InstanceId>(5));
  EXPECT_FALSE(HasErrors(findings));
}

TEST(ValidateTest, DiagonalNeighboursAreSeparateComponents) {
  const auto findings = Validate(MaskFromRows({{1, 0}, {0, 1}}));
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].code, "non_contiguous");
}

TEST(ValidateTest, LengthMismatchIsAnError) {
  InstanceMask mask(2, 2);
  mask.labels.push_back(0);
  const auto findings = Validate(mask);
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].severity, Severity::kError);
  EXPECT_TRUE(HasErrors(findings));
}

TEST(ValidateTest, NonPositiveDimensionsAreErrors) {
  EXPECT_TRUE(HasErrors(Validate(InstanceMask(0, 3))));
  EXPECT_TRUE(HasErrors(Validate(InstanceMask(3, -1, {}))));
}

// Any mask built through the constructor is structurally valid, so the
// only findings are contiguity warnings, one per fragmented instance.
TEST(ValidateTest, RandomMasksOnlyWarnAboutFragments) {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const InstanceMask mask = RandomMask(rng, 1 + trial % 12, 1 + trial % 9, 6);
    const auto findings = Validate(mask);
    EXPECT_FALSE(HasErrors(findings));
    std::size_t fragmented = 0;
    for (const auto& s : ComputeInstanceStats(mask)) fragmented += s.component_count > 1;
    EXPECT_EQ(findings.size(), fragmented);
  }
}

TEST(InstanceStatsTest, TopLeftBlock) {
  InstanceMask mask(4, 4);
  mask.at(0, 0) = mask.at(1, 0) = mask.at(0, 1) = mask.at(1, 1) = 1;
  const auto stats = ComputeInstanceStats(mask);
  ASSERT_EQ(stats.size(), 1u);
  EXPECT_EQ(stats[0].area, 4u);
  EXPECT_EQ(stats[0].min_x, 0);
  EXPECT_EQ(stats[0].min_y, 0);
  EXPECT_EQ(stats[0].max_x, 1);
  EXPECT_EQ(stats[0].max_y, 1);
  EXPECT_DOUBLE_EQ(stats[0].centroid_x, 0.5);
  EXPECT_DOUBLE_EQ(stats[0].centroid_y, 0.5);
  EXPECT_EQ(stats[0].component_count, 1);
}

TEST(InstanceStatsTest, EmptyMask) {
  EXPECT_TRUE(ComputeInstanceStats(InstanceMask(3, 3)).empty());
}

TEST(InstanceStatsTest, AreasThreeAndFive) {
  const InstanceMask mask = MaskFromRows({
      {1, 1, 1, 0},
      {0, 0, 0, 0},
      {2, 2, 2, 2},
      {2, 0, 0, 0},
  });
  const auto stats = ComputeInstanceStats(mask);
  ASSERT_EQ(stats.size(), 2u);
  EXPECT_EQ(stats[0].area, 3u);
  EXPECT_EQ(stats[1].area, 5u);
  EXPECT_EQ(stats[0].area + stats[1].area, NonzeroCount(mask));
}

TEST(InstanceStatsTest, PropertiesOnRandomMasks) {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const InstanceMask mask =
        RandomMask(rng, 1 + static_cast<int>(rng.Below(20)),
                   1 + static_cast<int>(rng.Below(20)), 8);
    const auto stats = ComputeInstanceStats(mask);
    std::uint64_t total = 0;
    InstanceId previous = 0;
    for (const auto& s : stats) {
      EXPECT_GT(s.id, previous);
      previous = s.id;
      EXPECT_GE(s.area, 1u);
      EXPECT_GE(s.component_count, 1);
      EXPECT_LE(s.min_x, s.centroid_x);
      EXPECT_GE(s.max_x, s.centroid_x);
      EXPECT_LE(s.min_y, s.centroid_y);
      EXPECT_GE(s.max_y, s.centroid_y);
      total += s.area;
    }
    EXPECT_EQ(total, NonzeroCount(mask));
    EXPECT_EQ(stats.size(), InstanceIds(mask).size());
  }
}

TEST(InstanceStatsTest, RejectsMalformedMask) {
  InstanceMask mask(2, 2);
  mask.labels.pop_back();
  EXPECT_THROW(ComputeInstanceStats(mask), Error);
}

}  // namespace
}  // namespace nuclei_curation
