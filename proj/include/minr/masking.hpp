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

#ifndef MINR_MASKING_HPP_
#define MINR_MASKING_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "minr/image.hpp"

namespace minr {

// Non-overlapping p x p patches, numbered row-major.
struct PatchGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t patch = 0;

  static PatchGrid make(std::size_t height, std::size_t width, std::size_t patch);

  std::size_t rows() const { return height / patch; }
  std::size_t cols() const { return width / patch; }
  std::size_t count() const { return rows() * cols(); }
  std::size_t patch_values() const { return patch * patch * 3; }

  bool operator==(const PatchGrid&) const = default;
};

enum class MaskStrategy { random, block, grid_alternating };

std::string_view strategy_name(MaskStrategy s);
MaskStrategy parse_strategy(std::string_view name);

struct PatchMask {
  PatchGrid grid;
  std::vector<std::uint8_t> visible;  // one entry per patch
  MaskStrategy strategy = MaskStrategy::random;
  double ratio = 0.0;  // achieved masked fraction for block/grid_alternating
  std::uint64_t seed = 0;

  std::size_t masked_count() const;
  std::size_t visible_count() const { return visible.size() - masked_count(); }
  std::vector<std::size_t> visible_indices() const;
  std::vector<std::size_t> masked_indices() const;
  PatchMask inverted() const;
};

// floor(x + 0.5)
std::size_t round_half_up(double x);

// random: Fisher-Yates permutation of patch indices from SplitMix64(seed);
// the first round_half_up(ratio * P) entries are masked.
// block: the h x w rectangle whose area is closest to ratio * P (ties go to
// the squarer shape, then fewer rows), anchored at (next() % (rows-h+1),
// next() % (cols-w+1)).
// grid_alternating: checkerboard with patch (r, c) masked when r + c is
// even, unless ratio is closer to 0 than to the checkerboard fraction.
PatchMask make_mask(const PatchGrid& grid, MaskStrategy strategy, double ratio,
                    std::uint64_t seed);

// Per-instance, per-epoch mask seed.
std::uint64_t instance_mask_seed(std::uint64_t base_seed, std::uint64_t instance,
                                 std::uint64_t epoch);

struct VisiblePatch {
  std::size_t index = 0;
  std::vector<double> pixels;  // p * p * 3, row-major within the patch
};

struct MaskedView {
  Image masked_image;
  std::vector<VisiblePatch> visible;
};

inline constexpr double kMaskFill = 0.5;

MaskedView apply_mask(const Image& image, const PatchMask& mask);

// Pixel i is set iff its patch is masked.
std::vector<std::uint8_t> pixel_mask(const PatchMask& mask);

std::vector<double> extract_patch(const Image& image, const PatchGrid& grid,
                                  std::size_t index);
void write_patch(Image& image, const PatchGrid& grid, std::size_t index,
                 const double* values);

}  // namespace minr

#endif  // MINR_MASKING_HPP_
