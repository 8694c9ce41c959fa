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

#ifndef MINR_MODEL_HPP_
#define MINR_MODEL_HPP_

// Common face of the three trainable models so the training loop, the
// evaluation harness and the CLI treat MINR and the MAE baseline alike.

#include <memory>
#include <string_view>

#include "minr/config.hpp"
#include "minr/hypernet.hpp"
#include "minr/mae.hpp"

namespace minr {

enum class ModelMode { transinr, ginr, mae };

std::string_view mode_name(ModelMode mode);
ModelMode parse_mode(std::string_view name);

class Model {
 public:
  virtual ~Model() = default;

  virtual ModelMode mode() const = 0;
  virtual const PatchGrid& grid() const = 0;

  // Per-instance training objective under `mask`.
  virtual ad::Tensor objective(const Image& target, const PatchMask& mask) const = 0;
  // Full reconstruction clamped to [0, 1], visible patches not pasted.
  virtual Image reconstruct(const Image& image, const PatchMask& mask) const = 0;

  virtual nn::ParamList parameters() const = 0;
  virtual nn::ParamCensus count_params() const = 0;
};

class MinrModel final : public Model {
 public:
  MinrModel(const HypernetConfig& config, std::uint64_t init_seed);

  ModelMode mode() const override;
  const PatchGrid& grid() const override { return net_.config().grid; }

  // Full-image L2 against the unmasked target (instance_loss).
  ad::Tensor objective(const Image& target, const PatchMask& mask) const override;
  Image reconstruct(const Image& image, const PatchMask& mask) const override;

  inr::InrWeights predict(const Image& image, const PatchMask& mask) const;
  // Prediction on the training grid, [H*W, 3], unclamped.
  ad::Tensor predict_rgb(const inr::InrWeights& weights) const;

  nn::ParamList parameters() const override { return net_.parameters(); }
  nn::ParamCensus count_params() const override { return net_.count_params(); }

  Hypernet& net() { return net_; }
  const Hypernet& net() const { return net_; }
  const ad::Tensor& features() const { return features_; }

 private:
  Hypernet net_;
  ad::Tensor features_;  // encoded training grid
};

class MaeModel final : public Model {
 public:
  MaeModel(const MaeConfig& config, std::uint64_t init_seed);

  ModelMode mode() const override { return ModelMode::mae; }
  const PatchGrid& grid() const override { return mae_.config().grid; }

  // Masked-patch-only pixel MSE (mae_loss).
  ad::Tensor objective(const Image& target, const PatchMask& mask) const override;
  Image reconstruct(const Image& image, const PatchMask& mask) const override;

  nn::ParamList parameters() const override { return mae_.parameters(); }
  nn::ParamCensus count_params() const override { return mae_.count_params(); }

  MiniMae& mae() { return mae_; }
  const MiniMae& mae() const { return mae_; }

 private:
  MiniMae mae_;
};

PatchGrid grid_from_config(const Config& config);
HypernetConfig hypernet_config(const Config& config);
MaeConfig mae_config(const Config& config);

// Builds the model selected by model.mode, initialized from train.seed.
std::unique_ptr<Model> make_model(const Config& config);

}  // namespace minr

#endif  // MINR_MODEL_HPP_
