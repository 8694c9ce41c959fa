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

#include "minr/model.hpp"

#include <string>

#include "minr/error.hpp"
#include "minr/training.hpp"

namespace minr {

std::string_view mode_name(ModelMode mode) {
  switch (mode) {
    case ModelMode::transinr: return "transinr";
    case ModelMode::ginr: return "ginr";
    case ModelMode::mae: return "mae";
  }
  return "transinr";
}

ModelMode parse_mode(std::string_view name) {
  if (name == "transinr") return ModelMode::transinr;
  if (name == "ginr") return ModelMode::ginr;
  if (name == "mae") return ModelMode::mae;
  throw Error("unknown model.mode '" + std::string(name) + "'");
}

MinrModel::MinrModel(const HypernetConfig& config, std::uint64_t init_seed)
    : net_(config, init_seed),
      features_(inr::encode(inr::make_grid(config.grid.height, config.grid.width),
                            config.features)) {}

ModelMode MinrModel::mode() const {
  return net_.config().mode == HeadMode::ginr ? ModelMode::ginr
                                              : ModelMode::transinr;
}

inr::InrWeights MinrModel::predict(const Image& image,
                                   const PatchMask& mask) const {
  return net_.predict(apply_mask(image, mask));
}

ad::Tensor MinrModel::predict_rgb(const inr::InrWeights& weights) const {
  return inr::forward(weights, features_);
}

ad::Tensor MinrModel::objective(const Image& target, const PatchMask& mask) const {
  const ad::Tensor pred = predict_rgb(predict(target, mask));
  const ad::Tensor truth =
      ad::Tensor::from({target.pixel_count(), 3}, target.pixels);
  return instance_loss(pred, truth);
}

Image MinrModel::reconstruct(const Image& image, const PatchMask& mask) const {
  return inr::to_image(predict_rgb(predict(image, mask)), image.height,
                       image.width);
}

MaeModel::MaeModel(const MaeConfig& config, std::uint64_t init_seed)
    : mae_(config, init_seed) {}

ad::Tensor MaeModel::objective(const Image& target, const PatchMask& mask) const {
  return mae_loss(mae_.forward(target, mask), target, mask);
}

Image MaeModel::reconstruct(const Image& image, const PatchMask& mask) const {
  return patches_to_image(mae_.forward(image, mask), mask.grid);
}

PatchGrid grid_from_config(const Config& config) {
  const auto size = static_cast<std::size_t>(config.get_int("data.size"));
  return PatchGrid::make(size, size,
                         static_cast<std::size_t>(config.get_int("model.patch")));
}

HypernetConfig hypernet_config(const Config& config) {
  HypernetConfig h;
  const ModelMode mode = parse_mode(config.get_string("model.mode"));
  h.mode = mode == ModelMode::ginr ? HeadMode::ginr : HeadMode::transinr;
  h.grid = grid_from_config(config);
  h.d_model = static_cast<std::size_t>(config.get_int("model.d_model"));
  h.depth = static_cast<std::size_t>(config.get_int("model.depth"));
  h.heads = static_cast<std::size_t>(config.get_int("model.heads"));
  h.inr_width = static_cast<std::size_t>(config.get_int("model.inr_width"));
  h.inr_layers = static_cast<std::size_t>(config.get_int("model.inr_layers"));
  h.activation = inr::parse_activation(config.get_string("model.activation"));
  const std::string& features = config.get_string("model.features");
  if (features == "identity") {
    h.features.mode = inr::CoordinateFeatures::Mode::identity;
  } else if (features == "fourier") {
    h.features.mode = inr::CoordinateFeatures::Mode::fourier;
  } else {
    throw Error("unknown model.features '" + features + "'");
  }
  h.features.num_frequencies =
      static_cast<std::size_t>(config.get_int("model.fourier_frequencies"));
  h.features.base_frequency = config.get_double("model.fourier_base");
  h.ginr_layer =
      static_cast<std::size_t>(config.get_int("model.ginr_specific_layer"));
  return h;
}

MaeConfig mae_config(const Config& config) {
  MaeConfig m;
  m.grid = grid_from_config(config);
  m.d_model = static_cast<std::size_t>(config.get_int("model.d_model"));
  m.depth = static_cast<std::size_t>(config.get_int("model.depth"));
  m.heads = static_cast<std::size_t>(config.get_int("model.heads"));
  m.dec_dim = static_cast<std::size_t>(config.get_int("baseline.dec_dim"));
  m.dec_depth = static_cast<std::size_t>(config.get_int("baseline.dec_depth"));
  m.dec_heads = static_cast<std::size_t>(config.get_int("baseline.dec_heads"));
  return m;
}

std::unique_ptr<Model> make_model(const Config& config) {
  const std::uint64_t seed = config.get_seed("train.seed");
  if (parse_mode(config.get_string("model.mode")) == ModelMode::mae)
    return std::make_unique<MaeModel>(mae_config(config), seed);
  return std::make_unique<MinrModel>(hypernet_config(config), seed);
}

}  // namespace minr
