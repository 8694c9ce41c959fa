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

#ifndef MINR_INR_HPP_
#define MINR_INR_HPP_

// Coordinate MLP mapping (x, y) in [-1, 1]^2 to RGB.

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "minr/autodiff.hpp"
#include "minr/image.hpp"

namespace minr::inr {

enum class Activation { relu, sin };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

struct CoordinateFeatures {
  enum class Mode { identity, fourier };
  Mode mode = Mode::fourier;
  std::size_t num_frequencies = 6;
  double base_frequency = 1.0;

  std::size_t dim() const {
    return mode == Mode::identity ? 2 : 2 + 4 * num_frequencies;
  }
};

// Row i holds the center of pixel (i / W, i % W): x follows the column,
// y the row, both mapped affinely onto [-1, 1].
struct CoordinateGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> coords;  // (x, y) per row

  std::size_t rows() const { return height * width; }
  // Inverse of the pixel-center map, before rounding.
  std::pair<double, double> pixel_of(double x, double y) const;
};

CoordinateGrid make_grid(std::size_t height, std::size_t width);

// identity: [x, y]. fourier: [x, y] followed, for k = 0..K-1 and then for
// each axis, by sin(2^k pi b v), cos(2^k pi b v).
ad::Tensor encode(const CoordinateGrid& grid, const CoordinateFeatures& spec);

struct Layer {
  ad::Tensor weight;  // [in, out]
  ad::Tensor bias;    // [out]
};

struct InrWeights {
  std::vector<Layer> layers;
  Activation activation = Activation::relu;
  CoordinateFeatures features;

  std::size_t depth() const { return layers.size(); }
  // Throws unless widths chain, the first layer consumes features.dim()
  // values and the last emits 3.
  void validate() const;
};

// Layer widths for an L-layer net: in_1 = feature dim, out_L = 3, hidden
// layers all `width` wide.
std::vector<std::pair<std::size_t, std::size_t>> layer_shapes(
    std::size_t feature_dim, std::size_t width, std::size_t layers);

// Hidden layers apply the activation; the last layer is linear and
// unclamped.
ad::Tensor forward(const InrWeights& weights, const ad::Tensor& features);

// Converts an [H*W, 3] prediction into an image, clamped to [0, 1].
Image to_image(const ad::Tensor& rgb, std::size_t height, std::size_t width);

Image render(const InrWeights& weights, std::size_t height, std::size_t width);

}  // namespace minr::inr

#endif  // MINR_INR_HPP_
