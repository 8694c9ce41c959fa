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

#include "minr/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "minr/error.hpp"

namespace minr {
namespace {

// PPM header tokens are whitespace separated with '#' comments.
int read_ppm_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
    c = in.peek();
  }
  int v = -1;
  if (!(in >> v)) throw Error("ppm: malformed header");
  return v;
}

}  // namespace

Image clamp01(Image img) {
  for (double& v : img.pixels) v = std::clamp(v, 0.0, 1.0);
  return img;
}

Image dequantize(const Rgb8& raw) {
  Image img(raw.height, raw.width);
  for (std::size_t i = 0; i < raw.bytes.size(); ++i)
    img.pixels[i] = static_cast<double>(raw.bytes[i]) / 255.0;
  return img;
}

Rgb8 quantize(const Image& img) {
  Rgb8 out{img.height, img.width, std::vector<std::uint8_t>(img.pixels.size())};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double v = std::clamp(img.pixels[i], 0.0, 1.0);
    out.bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

Rgb8 read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw Error("png: " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  Rgb8 out{image.height, image.width, {}};
  out.bytes.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.bytes.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error("png: " + path.string() + ": " + image.message);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Rgb8& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.bytes.data(), 0,
                               nullptr)) {
    throw Error("png: " + path.string() + ": " + image.message);
  }
}

Rgb8 read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '6')
    throw Error("ppm: not a P6 file: " + path.string());
  const int w = read_ppm_int(in);
  const int h = read_ppm_int(in);
  const int maxval = read_ppm_int(in);
  if (w <= 0 || h <= 0 || maxval != 255)
    throw Error("ppm: unsupported header in " + path.string());
  in.get();  // single whitespace before the raster
  Rgb8 out{static_cast<std::size_t>(h), static_cast<std::size_t>(w), {}};
  out.bytes.resize(out.width * out.height * 3);
  in.read(reinterpret_cast<char*>(out.bytes.data()),
          static_cast<std::streamsize>(out.bytes.size()));
  if (!in) throw Error("ppm: truncated raster in " + path.string());
  return out;
}

void write_ppm(const std::filesystem::path& path, const Rgb8& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string());
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.bytes.data()),
            static_cast<std::streamsize>(img.bytes.size()));
}

Image read_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw Error("cannot open " + path.string());
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  if (probe.gcount() >= 2 && sig[0] == 'P' && sig[1] == '6')
    return dequantize(read_ppm(path));
  if (probe.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0)
    return dequantize(read_png(path));
  throw Error("unrecognized image format: " + path.string());
}

void write_image(const std::filesystem::path& path, const Image& img) {
  if (path.extension() == ".ppm") {
    write_ppm(path, quantize(img));
  } else {
    write_png(path, quantize(img));
  }
}

Image center_crop_square(const Image& img) {
  const std::size_t side = std::min(img.height, img.width);
  const std::size_t r0 = (img.height - side) / 2;
  const std::size_t c0 = (img.width - side) / 2;
  Image out(side, side);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c)
      for (std::size_t ch = 0; ch < 3; ++ch)
        out.at(r, c, ch) = img.at(r0 + r, c0 + c, ch);
  return out;
}

Image resize_bilinear(const Image& img, std::size_t height, std::size_t width) {
  if (img.height == 0 || img.width == 0 || height == 0 || width == 0)
    throw Error("resize: zero dimension");
  Image out(height, width);
  const double sy = static_cast<double>(img.height) / static_cast<double>(height);
  const double sx = static_cast<double>(img.width) / static_cast<double>(width);
  for (std::size_t r = 0; r < height; ++r) {
    const double y = std::clamp((r + 0.5) * sy - 0.5, 0.0,
                                static_cast<double>(img.height - 1));
    const auto y0 = static_cast<std::size_t>(std::floor(y));
    const std::size_t y1 = std::min(y0 + 1, img.height - 1);
    const double fy = y - static_cast<double>(y0);
    for (std::size_t c = 0; c < width; ++c) {
      const double x = std::clamp((c + 0.5) * sx - 0.5, 0.0,
                                  static_cast<double>(img.width - 1));
      const auto x0 = static_cast<std::size_t>(std::floor(x));
      const std::size_t x1 = std::min(x0 + 1, img.width - 1);
      const double fx = x - static_cast<double>(x0);
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double top = img.at(y0, x0, ch) * (1 - fx) + img.at(y0, x1, ch) * fx;
        const double bot = img.at(y1, x0, ch) * (1 - fx) + img.at(y1, x1, ch) * fx;
        out.at(r, c, ch) = top * (1 - fy) + bot * fy;
      }
    }
  }
  return out;
}

Image downsample_box(const Image& img, std::size_t factor) {
  if (factor == 0 || img.height % factor || img.width % factor)
    throw Error("downsample_box: factor must divide both dimensions");
  Image out(img.height / factor, img.width / factor);
  const double inv = 1.0 / static_cast<double>(factor * factor);
  for (std::size_t r = 0; r < out.height; ++r)
    for (std::size_t c = 0; c < out.width; ++c)
      for (std::size_t ch = 0; ch < 3; ++ch) {
        double s = 0.0;
        for (std::size_t dy = 0; dy < factor; ++dy)
          for (std::size_t dx = 0; dx < factor; ++dx)
            s += img.at(r * factor + dy, c * factor + dx, ch);
        out.at(r, c, ch) = s * inv;
      }
  return out;
}

}  // namespace minr
