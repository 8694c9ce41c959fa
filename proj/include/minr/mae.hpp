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

#ifndef MINR_MAE_HPP_
#define MINR_MAE_HPP_

// Miniature masked autoencoder baseline. The encoder sees visible patches
// only; the decoder sees all P positions with a learned mask token at the
// masked ones, and regresses raw pixels. The loss covers masked patches only.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "minr/masking.hpp"
#include "minr/nn.hpp"

namespace minr {

struct MaeConfig {
  PatchGrid grid = PatchGrid{64, 64, 8};
  std::size_t d_model = 128;
  std::size_t depth = 4;
  std::size_t heads = 4;
  std::size_t dec_dim = 64;
  std::size_t dec_depth = 2;
  std::size_t dec_heads = 4;
};

class MiniMae {
 public:
  MiniMae(const MaeConfig& config, std::uint64_t init_seed);

  const MaeConfig& config() const { return config_; }

  // Per-patch pixel predictions [P, p*p*3], unclamped.
  ad::Tensor forward(const Image& image, const PatchMask& mask) const;

  // Decoder input row i reads row gather[i] of [encoded visible | mask
  // token]; entries equal to the visible count select the mask token.
  static std::vector<std::size_t> decoder_gather(const PatchMask& mask);

  nn::ParamList parameters() const;
  nn::ParamCensus count_params() const;

  nn::Encoder& encoder() { return encoder_; }
  nn::Linear& head() { return head_; }
  ad::Tensor& mask_token() { return mask_token_; }

 private:
  MaeConfig config_;
  nn::Encoder encoder_;
  ad::Tensor mask_token_;  // [1, d_model]
  nn::Linear dec_embed_;
  ad::Tensor dec_pos_;  // [P, dec_dim]
  std::vector<nn::TransformerBlock> dec_blocks_;
  nn::LayerNorm dec_norm_;
  nn::Linear head_;
};

// Mean squared error over masked-patch pixels only. Throws when no patch is
// masked.
ad::Tensor mae_loss(const ad::Tensor& pred, const Image& target,
                    const PatchMask& mask);

// Clamped head output at masked patches, original pixels pasted elsewhere.
Image mae_reconstruct(const Image& image, const PatchMask& mask,
                      const MiniMae& model);

// Image assembled from per-patch predictions without pasting, clamped.
Image patches_to_image(const ad::Tensor& pred, const PatchGrid& grid);

// Copies visible patches of `source` into `recon`.
Image paste_visible(Image recon, const Image& source, const PatchMask& mask);

}  // namespace minr

#endif  // MINR_MAE_HPP_
