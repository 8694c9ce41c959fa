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

#include <cmath>
#include <complex>
#include <set>

#include "minr/config.hpp"
#include "minr/data.hpp"
#include "minr/error.hpp"
#include "minr/image.hpp"
#include "test_util.hpp"

namespace minr {
namespace {

using testing::random_image;
using testing::scratch_dir;

// Fraction of (mean-removed) spectral energy whose radial frequency exceeds
// a quarter of Nyquist, from a direct 2-D DFT of the luminance.
double high_band_fraction(const Image& img) {
  const std::size_t n = img.height;
  std::vector<double> lum(n * n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) {
    lum[i] = (img.pixels[3 * i] + img.pixels[3 * i + 1] + img.pixels[3 * i + 2]) / 3.0;
    mean += lum[i];
  }
  mean /= static_cast<double>(n * n);
  // Separable DFT: rows, then columns.
  std::vector<std::complex<double>> tmp(n * n), out(n * n);
  const double w = -2.0 * M_PI / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> s = 0.0;
      for (std::size_t c = 0; c < n; ++c)
        s += (lum[r * n + c] - mean) * std::polar(1.0, w * static_cast<double>(k * c));
      tmp[r * n + k] = s;
    }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) {
      std::complex<double> s = 0.0;
      for (std::size_t r = 0; r < n; ++r)
        s += tmp[r * n + k] * std::polar(1.0, w * static_cast<double>(l * r));
      out[l * n + k] = s;
    }
  double total = 0.0, high = 0.0;
  const double nyquist = static_cast<double>(n) / 2.0;
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t k = 0; k < n; ++k) {
      const double fy = l <= n / 2 ? l : static_cast<double>(n) - l;
      const double fx = k <= n / 2 ? k : static_cast<double>(n) - k;
      const double e = std::norm(out[l * n + k]);
      total += e;
      if (std::hypot(fx, fy) > nyquist / 4.0) high += e;
    }
  return total > 0.0 ? high / total : 0.0;
}

TEST(SynthTest, Deterministic) {
  const auto a = synth_domain(SynthKind::faces_like, 6, 16, 3);
  const auto b = synth_domain(SynthKind::faces_like, 6, 16, 3);
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].id, b.train[i].id);
    EXPECT_EQ(a.train[i].pixels, b.train[i].pixels);
  }
  EXPECT_NE(synth_image(SynthKind::scenes_like, 16, 1).pixels,
            synth_image(SynthKind::scenes_like, 16, 2).pixels);
}

TEST(SynthTest, ValuesInUnitRange) {
  for (auto kind : {SynthKind::faces_like, SynthKind::scenes_like})
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      for (double v : synth_image(kind, 32, seed).pixels) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
}

TEST(SynthTest, ScenesCarryMoreHighFrequencyEnergy) {
  double faces = 0.0, scenes = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    faces += high_band_fraction(synth_image(SynthKind::faces_like, 32, 1000 + i));
    scenes += high_band_fraction(synth_image(SynthKind::scenes_like, 32, 2000 + i));
  }
  EXPECT_GT(scenes / 100.0, faces / 100.0);
}

TEST(SynthTest, CountBelowTwoThrows) {
  EXPECT_THROW(synth_domain(SynthKind::faces_like, 1, 16, 0), Error);
  EXPECT_THROW(parse_synth("cats"), Error);
}

TEST(SplitTest, DisjointPureAndOrderIndependent) {
  std::vector<ImageInstance> insts;
  for (int i = 0; i < 30; ++i)
    insts.push_back({"img" + std::to_string(i), Image(2, 2, 0.1 * (i % 10)), "d"});
  const DatasetSplit a = split_instances(insts, "d", 7);
  std::vector<ImageInstance> rev(insts.rbegin(), insts.rend());
  const DatasetSplit b = split_instances(rev, "d", 7);
  EXPECT_EQ(a.test.size(), 3u);
  EXPECT_EQ(a.train.size(), 27u);
  std::set<std::string> train_ids;
  for (const auto& t : a.train) train_ids.insert(t.id);
  for (const auto& t : a.test) EXPECT_FALSE(train_ids.count(t.id));
  ASSERT_EQ(a.test.size(), b.test.size());
  for (std::size_t i = 0; i < a.test.size(); ++i) EXPECT_EQ(a.test[i].id, b.test[i].id);
  const DatasetSplit c = split_instances(insts, "d", 8);
  bool differs = false;
  for (std::size_t i = 0; i < a.test.size(); ++i) differs |= a.test[i].id != c.test[i].id;
  EXPECT_TRUE(differs);
  EXPECT_EQ(split_instances(insts, "d", 7, 5).test.size(), 5u);
}

TEST(LoadDirTest, TenImagesSplitNineOne) {
  const auto dir = scratch_dir("ten");
  for (int i = 0; i < 10; ++i) {
    const Image img = random_image(20 + i, 24, i);
    write_image(dir / ("im" + std::to_string(i) + (i % 2 ? ".png" : ".ppm")), img);
  }
  const DatasetSplit a = load_dir(dir, 16, 4, 1);
  EXPECT_EQ(a.train.size(), 9u);
  EXPECT_EQ(a.test.size(), 1u);
  EXPECT_EQ(a.domain, "ten");
  const DatasetSplit b = load_dir(dir, 16, 4, 1);
  EXPECT_EQ(a.test.front().id, b.test.front().id);
  for (const auto& s : {a.train, a.test})
    for (const auto& inst : s) {
      EXPECT_EQ(inst.pixels.height, 16u);
      EXPECT_EQ(inst.pixels.width, 16u);
    }
}

TEST(LoadDirTest, SmallImagesAreUpscaledInRange) {
  const auto dir = scratch_dir("small");
  for (int i = 0; i < 3; ++i) write_image(dir / ("s" + std::to_string(i) + ".png"), random_image(5, 7, i));
  const DatasetSplit s = load_dir(dir, 32, 8, 1);
  for (const auto& inst : s.train) {
    EXPECT_EQ(inst.pixels.height, 32u);
    for (double v : inst.pixels.pixels) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(LoadDirTest, SkipsUnreadableAndRejectsEmpty) {
  const auto dir = scratch_dir("junk");
  EXPECT_THROW(load_dir(dir, 16, 4, 1), Error);
  write_image(dir / "a.png", random_image(8, 8, 1));
  write_image(dir / "b.png", random_image(8, 8, 2));
  {
    std::ofstream bad(dir / "c.png");
    bad << "not a png";
  }
  const DatasetSplit s = load_dir(dir, 8, 4, 1);
  EXPECT_EQ(s.train.size() + s.test.size(), 2u);
}

TEST(LoadSourceTest, ChecksDivisibilityAndScheme) {
  Config c = Config::defaults();
  c.set("data.count", "4");
  c.set("data.size", "20");
  EXPECT_THROW(load_source("synth:faces_like", c), Error);
  c.set("data.size", "16");
  c.set("model.patch", "4");
  EXPECT_EQ(load_source("synth:faces_like", c).domain, "faces_like");
  EXPECT_THROW(load_source("http:x", c), Error);
  EXPECT_THROW(load_source("faces_like", c), Error);
  EXPECT_EQ(source_domain("synth:scenes_like"), "scenes_like");
  EXPECT_EQ(source_domain("dir:/data/celeb/"), "celeb");
}

TEST(ImageTest, QuantizeRoundTripAndPngPpmIo) {
  const auto dir = scratch_dir("io");
  Image img = random_image(5, 6, 3);
  const Image q = dequantize(quantize(img));
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    EXPECT_LE(std::abs(q.pixels[i] - img.pixels[i]), 0.5 / 255.0 + 1e-12);
  write_image(dir / "x.png", q);
  write_image(dir / "x.ppm", q);
  EXPECT_EQ(read_image(dir / "x.png"), q);
  EXPECT_EQ(read_image(dir / "x.ppm"), q);
  EXPECT_EQ(dequantize(quantize(Image(1, 1, 200.0 / 255.0))).pixels[0], 200.0 / 255.0);
}

TEST(ImageTest, CropResizeDownsample) {
  const Image img = random_image(6, 10, 4);
  const Image sq = center_crop_square(img);
  EXPECT_EQ(sq.height, 6u);
  EXPECT_EQ(sq.width, 6u);
  EXPECT_EQ(sq.at(0, 0, 0), img.at(0, 2, 0));
  EXPECT_EQ(resize_bilinear(sq, 6, 6), sq);
  const Image flat(4, 4, 0.25);
  EXPECT_EQ(resize_bilinear(flat, 9, 7), Image(9, 7, 0.25));
  Image two(2, 2);
  two.pixels = {0, 0, 0, 1, 1, 1, 1, 1, 1, 0, 0, 0};
  const Image one = downsample_box(two, 2);
  EXPECT_DOUBLE_EQ(one.pixels[0], 0.5);
}

}  // namespace
}  // namespace minr
