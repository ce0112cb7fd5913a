/*
 * Copyright 2026 The rex3d Authors.
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

#include "rex3d/explanation.h"

#include <cmath>

#include <gtest/gtest.h>

#include "rex3d/errors.h"
#include "rex3d/random.h"
#include "support/test_support.h"

namespace rex3d {
namespace {

using testing::RandomVolume;

const Dims kCube32{32, 32, 32};

TEST(RankVoxelsTest, DescendingWithIndexTieBreak) {
  const VoxelGrid r({6, 1, 1}, std::vector<float>{0.5f, 1.0f, 0.5f, 0.0f, 1.0f, 0.5f});
  EXPECT_EQ(RankVoxels(r), (std::vector<int64_t>{1, 4, 0, 2, 5, 3}));
}

TEST(ExtractExplanationTest, UniformMapAndAcceptingOracleStopAfterOneBatch) {
  ResponsibilityMap rm(kCube32);
  for (float& v : rm.grid().data()) v = 1.0f;
  auto oracle = MakeSyntheticOracle(ConstantLabel{1});
  const Explanation e = ExtractExplanation(rm, RandomVolume(kCube32, 1), *oracle,
                                           OcclusionSpec::Zero(), Target{1});
  EXPECT_EQ(e.voxel_count, 328);
  EXPECT_EQ(e.batch_size, 328);
  EXPECT_EQ(e.batches, 1);
  EXPECT_EQ(e.model_calls, 1);
  EXPECT_EQ(e.verdict.label, 1);
  // The first 328 voxels in index order.
  for (int64_t i = 0; i < e.mask.size(); ++i) ASSERT_EQ(e.mask[i], i < 328 ? 1.0f : 0.0f);
}

TEST(ExtractExplanationTest, ZeroMapHasNoSignal) {
  auto oracle = MakeSyntheticOracle(ConstantLabel{1});
  EXPECT_THROW(ExtractExplanation(ResponsibilityMap(kCube32), VoxelGrid(kCube32), *oracle,
                                  OcclusionSpec::Zero(), Target{1}),
               NoSignal);
}

TEST(ExtractExplanationTest, TargetDriftIsInsufficientMap) {
  ResponsibilityMap rm(kCube32);
  rm.grid()[0] = 1.0f;
  auto oracle = MakeSyntheticOracle(ConstantLabel{0});
  EXPECT_THROW(ExtractExplanation(rm, VoxelGrid(kCube32), *oracle, OcclusionSpec::Zero(),
                                  Target{1}, 0.25),
               InsufficientMap);
}

TEST(ExtractExplanationTest, MaskStaysInsideSupportOfRegionMap) {
  const Region r{{0, 8}, {0, 8}, {0, 8}};
  auto oracle = MakeSyntheticOracle(RegionMeanThreshold{r, 0.4});
  const VoxelGrid d = RandomVolume(kCube32, 2);
  ASSERT_EQ(ClassifyOne(*oracle, d, nullptr).label, 1);
  Rng rng(3);
  ResponsibilityMap rm(kCube32);
  for (int64_t i = 0; i < rm.grid().size(); ++i) {
    const auto c = rm.grid().Coords(i);
    if (r.Contains(c[0], c[1], c[2])) rm.grid()[i] = static_cast<float>(rng.Uniform(0.1, 1));
  }
  const Explanation e = ExtractExplanation(rm, d, *oracle, OcclusionSpec::Zero(), Target{1});
  EXPECT_EQ(e.verdict.label, 1);
  EXPECT_GT(e.shrink_removed, 0);
  for (int64_t i = 0; i < e.mask.size(); ++i) {
    if (e.mask[i] != 0.0f) ASSERT_GT(rm.grid()[i], 0.0f);
  }
  EXPECT_EQ(VerifySufficiency(e, d, *oracle, OcclusionSpec::Zero()).label, 1);
}

TEST(ExtractExplanationTest, MaskFromSearchOfRegionOracle) {
  const Region r{{0, 8}, {0, 8}, {0, 8}};
  auto oracle = MakeSyntheticOracle(RegionMeanThreshold{r, 0.4});
  const VoxelGrid d = RandomVolume(kCube32, 4);
  const RunResult run = GenerateRespMap(*oracle, d, OcclusionSpec::Zero(), {});
  const Explanation e = ExtractExplanation(run.map, d, *oracle, OcclusionSpec::Zero(),
                                           run.target);
  EXPECT_EQ(e.verdict.label, 1);
  for (int64_t i = 0; i < e.mask.size(); ++i) {
    if (e.mask[i] != 0.0f) ASSERT_GT(run.map.grid()[i], 0.0f);
  }
}

TEST(ExtractExplanationTest, SufficientMinimalAndBatchAlignedOnPhantoms) {
  auto oracle = MakeSyntheticOracle(ParseOracleKind(testing::kStandardSphere));
  for (uint64_t seed = 1; seed <= 8; ++seed) {
    const auto [volume, mask] = testing::StandardPhantom(seed);
    SearchConfig cfg;
    cfg.seed = seed;
    for (const auto& spec : {OcclusionSpec::Zero(), OcclusionSpec::Constant(0.1f)}) {
      const RunResult run = GenerateRespMap(*oracle, volume, spec, cfg);
      const Explanation e = ExtractExplanation(run.map, volume, *oracle, spec, run.target);
      ASSERT_TRUE(run.target.Accepts(VerifySufficiency(e, volume, *oracle, spec)));
      ASSERT_TRUE(FinalBatchIsNecessary(e, run.map, volume, *oracle, spec, run.target));
      ASSERT_EQ(e.voxel_count, e.batches * e.batch_size - e.shrink_removed);
      int64_t ones = 0;
      for (float v : e.mask.data()) ones += v != 0.0f;
      ASSERT_EQ(ones, e.voxel_count);
      const Explanation again = ExtractExplanation(run.map, volume, *oracle, spec, run.target);
      ASSERT_TRUE(again.mask.BitEquals(e.mask));
    }
  }
}

TEST(ExplanationOverlapTest, ClosedForms) {
  VoxelGrid a(kCube32, 0.0f), b(kCube32, 0.0f), c(kCube32, 0.0f);
  for (int64_t i = 0; i < 100; ++i) b[i] = 1.0f;
  for (int64_t i = 0; i < 50; ++i) a[i] = 1.0f;
  for (int64_t i = 500; i < 600; ++i) c[i] = 1.0f;
  const OverlapMetrics same = ExplanationOverlap(b, b);
  EXPECT_EQ(same.iou, 1.0);
  EXPECT_EQ(same.dice, 1.0);
  EXPECT_EQ(same.coverage, 1.0);
  const OverlapMetrics disjoint = ExplanationOverlap(b, c);
  EXPECT_EQ(disjoint.iou, 0.0);
  EXPECT_EQ(disjoint.dice, 0.0);
  EXPECT_EQ(disjoint.coverage, 0.0);
  const OverlapMetrics half = ExplanationOverlap(a, b);
  EXPECT_DOUBLE_EQ(half.iou, 0.5);
  EXPECT_DOUBLE_EQ(half.dice, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(half.coverage, 0.5);
  const OverlapMetrics empty = ExplanationOverlap(VoxelGrid(kCube32), VoxelGrid(kCube32));
  EXPECT_EQ(empty.iou, 1.0);
  EXPECT_EQ(empty.dice, 1.0);
  EXPECT_EQ(empty.coverage, 1.0);
}

TEST(ExplanationOverlapTest, MatchesSetArithmeticOnRandomMasks) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    VoxelGrid a({6, 6, 6}), b({6, 6, 6});
    const double pa = rng.UniformUnit(), pb = rng.UniformUnit();
    int inter = 0, na = 0, nb = 0;
    for (int64_t i = 0; i < a.size(); ++i) {
      a[i] = rng.UniformUnit() < pa ? 1.0f : 0.0f;
      b[i] = rng.UniformUnit() < pb ? 1.0f : 0.0f;
      na += a[i] != 0;
      nb += b[i] != 0;
      inter += a[i] != 0 && b[i] != 0;
    }
    const OverlapMetrics m = ExplanationOverlap(a, b);
    if (na + nb == 0) continue;
    ASSERT_DOUBLE_EQ(m.iou, static_cast<double>(inter) / (na + nb - inter));
    ASSERT_DOUBLE_EQ(m.dice, 2.0 * inter / (na + nb));
    if (nb > 0) ASSERT_DOUBLE_EQ(m.coverage, static_cast<double>(inter) / nb);
    ASSERT_DOUBLE_EQ(m.iou, ExplanationOverlap(b, a).iou);
    ASSERT_LE(m.iou, m.dice);
  }
}

TEST(ExplanationToJsonTest, Fields) {
  Explanation e;
  e.voxel_count = 12;
  e.batches = 2;
  e.verdict = {1, 0.75};
  const auto j = ExplanationToJson(e);
  EXPECT_EQ(j["voxel_count"], 12);
  EXPECT_EQ(j["batches"], 2);
  EXPECT_EQ(j["verdict"]["label"], 1);
  EXPECT_EQ(j["verdict"]["confidence"], 0.75);
}

}  // namespace
}  // namespace rex3d
