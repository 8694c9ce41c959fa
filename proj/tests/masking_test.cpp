// Copyright 2026 The MINR Authors. All Rights Reserved.
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

#include <set>

#include "minr/error.hpp"
#include "minr/masking.hpp"
#include "minr/rng.hpp"
#include "test_util.hpp"

namespace minr {
namespace {

using testing::random_image;

TEST(PatchGridTest, RequiresDivisibility) {
  EXPECT_EQ(PatchGrid::make(182, 182, 14).count(), 169u);
  EXPECT_THROW(PatchGrid::make(64, 64, 7), Error);
  EXPECT_THROW(PatchGrid::make(64, 64, 0), Error);
}

TEST(MaskTest, RandomRoundsHalfUp) {
  const PatchGrid g = PatchGrid::make(182, 182, 14);
  const PatchMask m = make_mask(g, MaskStrategy::random, 0.75, 1);
  EXPECT_EQ(m.masked_count(), 127u);
  EXPECT_EQ(m.visible_count(), 42u);
}

TEST(MaskTest, RandomCountPropertyAcrossRatios) {
  const PatchGrid g = PatchGrid::make(64, 64, 8);
  for (double ratio : {0.0, 0.1, 0.25, 0.5, 0.6, 0.75, 0.9}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const PatchMask m = make_mask(g, MaskStrategy::random, ratio, seed);
      EXPECT_EQ(m.masked_count(), round_half_up(ratio * 64));
      std::set<std::size_t> all;
      for (auto i : m.visible_indices()) all.insert(i);
      for (auto i : m.masked_indices()) EXPECT_TRUE(all.insert(i).second);
      EXPECT_EQ(all.size(), 64u);
    }
  }
}

TEST(MaskTest, RandomMatchesIndependentFisherYates) {
  // Oracle: the first k entries of a Fisher-Yates shuffle driven by
  // SplitMix64 with j = next() % (i + 1).
  const PatchGrid g = PatchGrid::make(32, 32, 8);
  const std::uint64_t seed = 0xdeadbeef;
  std::uint64_t state = seed;
  auto next = [&] {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::vector<std::size_t> perm(16);
  for (std::size_t i = 0; i < 16; ++i) perm[i] = i;
  for (std::size_t i = 15; i >= 1; --i) std::swap(perm[i], perm[next() % (i + 1)]);
  const PatchMask m = make_mask(g, MaskStrategy::random, 0.5, seed);
  std::vector<std::uint8_t> want(16, 1);
  for (std::size_t i = 0; i < 8; ++i) want[perm[i]] = 0;
  EXPECT_EQ(m.visible, want);
}

TEST(MaskTest, ZeroRatioAllVisible) {
  const PatchGrid g = PatchGrid::make(16, 16, 4);
  for (auto s : {MaskStrategy::random, MaskStrategy::block, MaskStrategy::grid_alternating})
    EXPECT_EQ(make_mask(g, s, 0.0, 3).masked_count(), 0u) << strategy_name(s);
}

TEST(MaskTest, Deterministic) {
  const PatchGrid g = PatchGrid::make(64, 64, 8);
  for (auto s : {MaskStrategy::random, MaskStrategy::block, MaskStrategy::grid_alternating})
    EXPECT_EQ(make_mask(g, s, 0.75, 42).visible, make_mask(g, s, 0.75, 42).visible);
  EXPECT_NE(make_mask(g, MaskStrategy::random, 0.75, 42).visible,
            make_mask(g, MaskStrategy::random, 0.75, 43).visible);
}

TEST(MaskTest, RatioOutOfRangeThrows) {
  const PatchGrid g = PatchGrid::make(16, 16, 4);
  EXPECT_THROW(make_mask(g, MaskStrategy::random, 1.0, 0), Error);
  EXPECT_THROW(make_mask(g, MaskStrategy::random, -0.1, 0), Error);
}

TEST(MaskTest, BlockIsOneContiguousRectangle) {
  const PatchGrid g = PatchGrid::make(64, 64, 8);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const PatchMask m = make_mask(g, MaskStrategy::block, 0.75, seed);
    std::size_t rmin = 99, rmax = 0, cmin = 99, cmax = 0;
    for (auto i : m.masked_indices()) {
      rmin = std::min(rmin, i / 8);
      rmax = std::max(rmax, i / 8);
      cmin = std::min(cmin, i % 8);
      cmax = std::max(cmax, i % 8);
    }
    const std::size_t area = (rmax - rmin + 1) * (cmax - cmin + 1);
    EXPECT_EQ(area, m.masked_count());
    EXPECT_EQ(m.masked_count(), 48u);  // 6 x 8 is exact for 0.75 * 64
    EXPECT_DOUBLE_EQ(m.ratio, 0.75);
  }
}

TEST(MaskTest, BlockReportsAchievedRatio) {
  const PatchGrid g = PatchGrid::make(20, 20, 4);  // 5 x 5 patches
  const PatchMask m = make_mask(g, MaskStrategy::block, 0.5, 1);
  // 12.5 is approached by 3x4 (12) or 4x3: squarer tie, fewer rows -> 3x4.
  EXPECT_EQ(m.masked_count(), 12u);
  EXPECT_DOUBLE_EQ(m.ratio, 12.0 / 25.0);
}

TEST(MaskTest, GridAlternatingIsCheckerboard) {
  const PatchGrid g = PatchGrid::make(16, 16, 4);
  const PatchMask m = make_mask(g, MaskStrategy::grid_alternating, 0.75, 9);
  EXPECT_DOUBLE_EQ(m.ratio, 0.5);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      EXPECT_EQ(m.visible[r * 4 + c], (r + c) % 2 == 0 ? 0 : 1);
  EXPECT_EQ(make_mask(g, MaskStrategy::grid_alternating, 0.2, 9).masked_count(), 0u);
}

TEST(MaskTest, NamesRoundTrip) {
  for (auto s : {MaskStrategy::random, MaskStrategy::block, MaskStrategy::grid_alternating})
    EXPECT_EQ(parse_strategy(strategy_name(s)), s);
  EXPECT_THROW(parse_strategy("stripes"), Error);
}

TEST(MaskTest, InstanceSeedsDifferByInstanceAndEpoch) {
  EXPECT_NE(instance_mask_seed(2, 0, 0), instance_mask_seed(2, 1, 0));
  EXPECT_NE(instance_mask_seed(2, 0, 0), instance_mask_seed(2, 0, 1));
  EXPECT_EQ(instance_mask_seed(2, 5, 3), instance_mask_seed(2, 5, 3));
}

TEST(ApplyMaskTest, ZeroRatioLeavesImage) {
  const Image img = random_image(16, 16, 1);
  const PatchMask m = make_mask(PatchGrid::make(16, 16, 4), MaskStrategy::random, 0.0, 0);
  const MaskedView v = apply_mask(img, m);
  EXPECT_EQ(v.masked_image, img);
  EXPECT_EQ(v.visible.size(), 16u);
}

TEST(ApplyMaskTest, UniformGrayIsUnchanged) {
  const Image img(16, 16, kMaskFill);
  const PatchMask m = make_mask(PatchGrid::make(16, 16, 4), MaskStrategy::random, 0.75, 0);
  EXPECT_EQ(apply_mask(img, m).masked_image, img);
}

TEST(ApplyMaskTest, FourPatchToyVisibleOrder) {
  const PatchGrid g = PatchGrid::make(4, 4, 2);
  PatchMask m{g, {0, 1, 1, 0}, MaskStrategy::random, 0.5, 0};
  const Image img = random_image(4, 4, 2);
  const MaskedView v = apply_mask(img, m);
  ASSERT_EQ(v.visible.size(), 2u);
  EXPECT_EQ(v.visible[0].index, 1u);
  EXPECT_EQ(v.visible[1].index, 2u);
  // Patch 1 covers rows 0-1, cols 2-3; pixels row-major within the patch.
  const std::vector<double> want{img.at(0, 2, 0), img.at(0, 2, 1), img.at(0, 2, 2),
                                 img.at(0, 3, 0), img.at(0, 3, 1), img.at(0, 3, 2),
                                 img.at(1, 2, 0), img.at(1, 2, 1), img.at(1, 2, 2),
                                 img.at(1, 3, 0), img.at(1, 3, 1), img.at(1, 3, 2)};
  EXPECT_EQ(v.visible[0].pixels, want);
}

TEST(ApplyMaskTest, IdempotentAndVisiblePixelsExact) {
  const PatchGrid g = PatchGrid::make(32, 32, 8);
  const Image img = random_image(32, 32, 3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PatchMask m = make_mask(g, MaskStrategy::random, 0.6, seed);
    const Image once = apply_mask(img, m).masked_image;
    EXPECT_EQ(apply_mask(once, m).masked_image, once);
    const auto pm = pixel_mask(m);
    for (std::size_t p = 0; p < pm.size(); ++p)
      for (std::size_t c = 0; c < 3; ++c)
        EXPECT_EQ(once.pixels[p * 3 + c], pm[p] ? kMaskFill : img.pixels[p * 3 + c]);
  }
}

TEST(ApplyMaskTest, DimensionMismatchThrows) {
  const PatchMask m = make_mask(PatchGrid::make(16, 16, 4), MaskStrategy::random, 0.5, 0);
  EXPECT_THROW(apply_mask(random_image(8, 8, 0), m), Error);
}

TEST(PixelMaskTest, SingleMaskedPatch) {
  const PatchGrid g = PatchGrid::make(8, 8, 4);
  PatchMask m{g, {1, 1, 0, 1}, MaskStrategy::random, 0.25, 0};
  const auto pm = pixel_mask(m);
  std::size_t count = 0;
  for (std::size_t p = 0; p < pm.size(); ++p) {
    if (!pm[p]) continue;
    ++count;
    EXPECT_GE(p / 8, 4u);
    EXPECT_LT(p % 8, 4u);
  }
  EXPECT_EQ(count, 16u);
}

TEST(PixelMaskTest, ComplementCoversEverything) {
  const PatchMask m = make_mask(PatchGrid::make(16, 16, 4), MaskStrategy::random, 0.5, 4);
  const auto a = pixel_mask(m), b = pixel_mask(m.inverted());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NE(a[i], b[i]);
  const PatchMask none = make_mask(m.grid, MaskStrategy::random, 0.0, 4);
  for (auto v : pixel_mask(none)) EXPECT_EQ(v, 0);
}

TEST(PatchIoTest, ExtractWriteRoundTrip) {
  const PatchGrid g = PatchGrid::make(12, 8, 4);
  const Image img = random_image(12, 8, 5);
  Image copy(12, 8);
  for (std::size_t i = 0; i < g.count(); ++i) write_patch(copy, g, i, extract_patch(img, g, i).data());
  EXPECT_EQ(copy, img);
}

}  // namespace
}  // namespace minr
