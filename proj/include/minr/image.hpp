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

#ifndef MINR_IMAGE_HPP_
#define MINR_IMAGE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace minr {

// Interleaved RGB, row-major, float64. Nominal range [0, 1].
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t h, std::size_t w, double fill = 0.0)
      : height(h), width(w), pixels(h * w * 3, fill) {}

  double& at(std::size_t r, std::size_t c, std::size_t ch) {
    return pixels[(r * width + c) * 3 + ch];
  }
  double at(std::size_t r, std::size_t c, std::size_t ch) const {
    return pixels[(r * width + c) * 3 + ch];
  }
  std::size_t pixel_count() const { return height * width; }

  bool operator==(const Image&) const = default;
};

Image clamp01(Image img);

// 8-bit RGB buffer as stored on disk.
struct Rgb8 {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> bytes;
};

// v / 255 exactly.
Image dequantize(const Rgb8& raw);
// round(clamp(v) * 255).
Rgb8 quantize(const Image& img);

Rgb8 read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Rgb8& img);
Rgb8 read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Rgb8& img);

// Dispatches on the file signature (PNG magic or "P6").
Image read_image(const std::filesystem::path& path);
// Dispatches on extension: .ppm writes P6, anything else PNG.
void write_image(const std::filesystem::path& path, const Image& img);

Image center_crop_square(const Image& img);
// Pixel-center aligned bilinear resampling with edge clamping.
Image resize_bilinear(const Image& img, std::size_t height, std::size_t width);
// Averages non-overlapping factor x factor blocks.
Image downsample_box(const Image& img, std::size_t factor);

}  // namespace minr

#endif  // MINR_IMAGE_HPP_
