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

#include "minr/inr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "minr/error.hpp"

namespace minr::inr {

std::string_view activation_name(Activation a) {
  return a == Activation::relu ? "relu" : "sin";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "sin") return Activation::sin;
  throw Error("unknown activation '" + std::string(name) + "'");
}

std::pair<double, double> CoordinateGrid::pixel_of(double x, double y) const {
  const double c = ((x + 1.0) * static_cast<double>(width) - 1.0) / 2.0;
  const double r = ((y + 1.0) * static_cast<double>(height) - 1.0) / 2.0;
  return {r, c};
}

CoordinateGrid make_grid(std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) {
    throw Error("make_grid: zero dimension " + std::to_string(height) + "x" +
                std::to_string(width));
  }
  CoordinateGrid g{height, width, std::vector<double>(height * width * 2)};
  for (std::size_t r = 0; r < height; ++r) {
    const double y = (2.0 * r + 1.0) / static_cast<double>(height) - 1.0;
    for (std::size_t c = 0; c < width; ++c) {
      const double x = (2.0 * c + 1.0) / static_cast<double>(width) - 1.0;
      g.coords[(r * width + c) * 2] = x;
      g.coords[(r * width + c) * 2 + 1] = y;
    }
  }
  return g;
}

ad::Tensor encode(const CoordinateGrid& grid, const CoordinateFeatures& spec) {
  const std::size_t d = spec.dim();
  const std::size_t n = grid.rows();
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = out.data() + i * d;
    const double v[2] = {grid.coords[2 * i], grid.coords[2 * i + 1]};
    row[0] = v[0];
    row[1] = v[1];
    if (spec.mode == CoordinateFeatures::Mode::identity) continue;
    std::size_t j = 2;
    for (std::size_t k = 0; k < spec.num_frequencies; ++k) {
      const double w =
          std::ldexp(1.0, static_cast<int>(k)) * std::numbers::pi * spec.base_frequency;
      for (double axis : v) {
        row[j++] = std::sin(w * axis);
        row[j++] = std::cos(w * axis);
      }
    }
  }
  return ad::Tensor::from({n, d}, std::move(out));
}

std::vector<std::pair<std::size_t, std::size_t>> layer_shapes(
    std::size_t feature_dim, std::size_t width, std::size_t layers) {
  if (layers < 2) throw Error("INR needs at least 2 layers");
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = l == 0 ? feature_dim : width;
    const std::size_t out = l + 1 == layers ? 3 : width;
    shapes.emplace_back(in, out);
  }
  return shapes;
}

void InrWeights::validate() const {
  if (layers.size() < 2) throw ShapeError("INR: fewer than 2 layers");
  std::size_t expected_in = features.dim();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& w = layers[l].weight;
    const auto& b = layers[l].bias;
    if (w.rank() != 2 || w.dim(0) != expected_in || b.rank() != 1 ||
        b.dim(0) != w.dim(1)) {
      throw ShapeError("INR layer " + std::to_string(l + 1) + ": weight " +
                       ad::shape_string(w.shape()) + ", bias " +
                       ad::shape_string(b.shape()) + ", expected input width " +
                       std::to_string(expected_in));
    }
    expected_in = w.dim(1);
  }
  if (expected_in != 3) throw ShapeError("INR: last layer must emit 3 channels");
}

ad::Tensor forward(const InrWeights& weights, const ad::Tensor& features) {
  weights.validate();
  if (features.rank() != 2 || features.dim(1) != weights.features.dim()) {
    throw ShapeError("INR forward: features " +
                     ad::shape_string(features.shape()) + " vs input width " +
                     std::to_string(weights.features.dim()));
  }
  ad::Tensor h = features;
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    h = ad::add(ad::matmul(h, weights.layers[l].weight), weights.layers[l].bias);
    if (l + 1 < weights.layers.size()) {
      h = weights.activation == Activation::relu ? ad::relu(h) : ad::sin(h);
    }
  }
  return h;
}

Image to_image(const ad::Tensor& rgb, std::size_t height, std::size_t width) {
  if (rgb.size() != height * width * 3)
    throw ShapeError("to_image: " + ad::shape_string(rgb.shape()) +
                     " does not hold a " + std::to_string(height) + "x" +
                     std::to_string(width) + " image");
  Image img(height, width);
  std::transform(rgb.data().begin(), rgb.data().end(), img.pixels.begin(),
                 [](double v) { return std::clamp(v, 0.0, 1.0); });
  return img;
}

Image render(const InrWeights& weights, std::size_t height, std::size_t width) {
  const CoordinateGrid grid = make_grid(height, width);
  return to_image(forward(weights, encode(grid, weights.features)), height,
                  width);
}

}  // namespace minr::inr
