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

#include "minr/masking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "minr/error.hpp"
#include "minr/rng.hpp"

namespace minr {

PatchGrid PatchGrid::make(std::size_t height, std::size_t width,
                          std::size_t patch) {
  if (patch == 0 || height == 0 || width == 0 || height % patch ||
      width % patch) {
    throw Error("patch size " + std::to_string(patch) + " must divide image " +
                std::to_string(height) + "x" + std::to_string(width));
  }
  return PatchGrid{height, width, patch};
}

std::string_view strategy_name(MaskStrategy s) {
  switch (s) {
    case MaskStrategy::random: return "random";
    case MaskStrategy::block: return "block";
    case MaskStrategy::grid_alternating: return "grid_alternating";
  }
  return "random";
}

MaskStrategy parse_strategy(std::string_view name) {
  if (name == "random") return MaskStrategy::random;
  if (name == "block") return MaskStrategy::block;
  if (name == "grid_alternating") return MaskStrategy::grid_alternating;
  throw Error("unknown mask strategy '" + std::string(name) + "'");
}

std::size_t PatchMask::masked_count() const {
  return static_cast<std::size_t>(std::count(visible.begin(), visible.end(), 0));
}

std::vector<std::size_t> PatchMask::visible_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < visible.size(); ++i)
    if (visible[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> PatchMask::masked_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < visible.size(); ++i)
    if (!visible[i]) out.push_back(i);
  return out;
}

PatchMask PatchMask::inverted() const {
  PatchMask out = *this;
  for (auto& v : out.visible) v = v ? 0 : 1;
  out.ratio = static_cast<double>(out.masked_count()) /
              static_cast<double>(out.visible.size());
  return out;
}

std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

PatchMask make_mask(const PatchGrid& grid, MaskStrategy strategy, double ratio,
                    std::uint64_t seed) {
  if (!(ratio >= 0.0) || ratio >= 1.0) {
    throw Error("mask ratio must lie in [0, 1), got " + std::to_string(ratio));
  }
  const std::size_t total = grid.count();
  PatchMask mask{grid, std::vector<std::uint8_t>(total, 1), strategy, ratio, seed};
  SplitMix64 rng(seed);

  switch (strategy) {
    case MaskStrategy::random: {
      const std::size_t k = std::min(round_half_up(ratio * total), total - 1);
      const auto perm = seeded_permutation(total, seed);
      for (std::size_t i = 0; i < k; ++i) mask.visible[perm[i]] = 0;
      break;
    }
    case MaskStrategy::block: {
      const double target = ratio * static_cast<double>(total);
      if (round_half_up(target) == 0) break;
      std::size_t best_h = 0, best_w = 0;
      double best_err = 0.0;
      for (std::size_t h = 1; h <= grid.rows(); ++h) {
        for (std::size_t w = 1; w <= grid.cols(); ++w) {
          if (h * w >= total) continue;
          const double err = std::abs(static_cast<double>(h * w) - target);
          const auto skew = [](std::size_t a, std::size_t b) {
            return a > b ? a - b : b - a;
          };
          const bool better =
              best_h == 0 || err < best_err ||
              (err == best_err && skew(h, w) < skew(best_h, best_w));
          if (better) {
            best_h = h;
            best_w = w;
            best_err = err;
          }
        }
      }
      const std::size_t r0 = rng.below(grid.rows() - best_h + 1);
      const std::size_t c0 = rng.below(grid.cols() - best_w + 1);
      for (std::size_t r = r0; r < r0 + best_h; ++r)
        for (std::size_t c = c0; c < c0 + best_w; ++c)
          mask.visible[r * grid.cols() + c] = 0;
      mask.ratio = static_cast<double>(best_h * best_w) / total;
      break;
    }
    case MaskStrategy::grid_alternating: {
      std::size_t checker = 0;
      for (std::size_t r = 0; r < grid.rows(); ++r)
        for (std::size_t c = 0; c < grid.cols(); ++c)
          if ((r + c) % 2 == 0) ++checker;
      if (checker >= total) checker = 0;  // 1x1 grid cannot be masked
      const double frac = static_cast<double>(checker) / total;
      if (checker > 0 && std::abs(ratio - frac) <= ratio) {
        for (std::size_t r = 0; r < grid.rows(); ++r)
          for (std::size_t c = 0; c < grid.cols(); ++c)
            if ((r + c) % 2 == 0) mask.visible[r * grid.cols() + c] = 0;
        mask.ratio = frac;
      } else {
        mask.ratio = 0.0;
      }
      break;
    }
  }
  return mask;
}

std::uint64_t instance_mask_seed(std::uint64_t base_seed, std::uint64_t instance,
                                 std::uint64_t epoch) {
  return mix_seed({base_seed, instance, epoch});
}

std::vector<double> extract_patch(const Image& image, const PatchGrid& grid,
                                  std::size_t index) {
  const std::size_t p = grid.patch;
  const std::size_t r0 = (index / grid.cols()) * p;
  const std::size_t c0 = (index % grid.cols()) * p;
  std::vector<double> out(grid.patch_values());
  for (std::size_t r = 0; r < p; ++r) {
    const double* src = &image.pixels[((r0 + r) * image.width + c0) * 3];
    std::copy_n(src, p * 3, out.data() + r * p * 3);
  }
  return out;
}

void write_patch(Image& image, const PatchGrid& grid, std::size_t index,
                 const double* values) {
  const std::size_t p = grid.patch;
  const std::size_t r0 = (index / grid.cols()) * p;
  const std::size_t c0 = (index % grid.cols()) * p;
  for (std::size_t r = 0; r < p; ++r) {
    double* dst = &image.pixels[((r0 + r) * image.width + c0) * 3];
    std::copy_n(values + r * p * 3, p * 3, dst);
  }
}

MaskedView apply_mask(const Image& image, const PatchMask& mask) {
  if (image.height != mask.grid.height || image.width != mask.grid.width) {
    throw Error("apply_mask: image " + std::to_string(image.height) + "x" +
                std::to_string(image.width) + " does not match mask grid " +
                std::to_string(mask.grid.height) + "x" +
                std::to_string(mask.grid.width));
  }
  MaskedView view{image, {}};
  const std::vector<double> fill(mask.grid.patch_values(), kMaskFill);
  for (std::size_t i = 0; i < mask.visible.size(); ++i) {
    if (mask.visible[i]) {
      view.visible.push_back({i, extract_patch(image, mask.grid, i)});
    } else {
      write_patch(view.masked_image, mask.grid, i, fill.data());
    }
  }
  return view;
}

std::vector<std::uint8_t> pixel_mask(const PatchMask& mask) {
  const PatchGrid& g = mask.grid;
  std::vector<std::uint8_t> out(g.height * g.width, 0);
  for (std::size_t r = 0; r < g.height; ++r)
    for (std::size_t c = 0; c < g.width; ++c)
      out[r * g.width + c] =
          mask.visible[(r / g.patch) * g.cols() + c / g.patch] ? 0 : 1;
  return out;
}

}  // namespace minr
