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

#ifndef MINR_HYPERNET_HPP_
#define MINR_HYPERNET_HPP_

// Transformer hypernetwork: visible patch tokens plus one learnable token per
// predicted weight column go through a shared encoder stack; each weight
// token's output is decoded by its layer's head into one column of W_l.
//
// transinr predicts every W_l. ginr predicts only the instance-specific
// layer and reuses directly trained matrices (phi) for all others, so two
// instances in a batch share every layer but that one.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "minr/inr.hpp"
#include "minr/masking.hpp"
#include "minr/nn.hpp"

namespace minr {

enum class HeadMode { transinr, ginr };

struct HypernetConfig {
  HeadMode mode = HeadMode::transinr;
  PatchGrid grid = PatchGrid{64, 64, 8};
  std::size_t d_model = 128;
  std::size_t depth = 4;
  std::size_t heads = 4;
  std::size_t inr_width = 64;
  std::size_t inr_layers = 5;
  inr::Activation activation = inr::Activation::relu;
  inr::CoordinateFeatures features;
  std::size_t ginr_layer = 2;  // 1-based index of the instance-specific W
};

// Rows are [patch tokens | weight tokens].
struct TokenSequence {
  ad::Tensor tokens;  // [T, d_model]
  std::size_t patch_tokens = 0;
  std::size_t weight_tokens = 0;

  std::size_t length() const { return patch_tokens + weight_tokens; }
};

class Hypernet {
 public:
  Hypernet(const HypernetConfig& config, std::uint64_t init_seed);

  const HypernetConfig& config() const { return config_; }

  // 0-based indices of the layers whose weights come from tokens.
  const std::vector<std::size_t>& predicted_layers() const {
    return predicted_;
  }
  std::size_t weight_token_count() const { return weight_tokens_.dim(0); }

  // Masked patches contribute no token.
  TokenSequence embed_patches(std::span<const VisiblePatch> visible) const;
  TokenSequence append_weight_tokens(const TokenSequence& prefix) const;
  TokenSequence transformer_forward(const TokenSequence& seq) const;
  inr::InrWeights predict_weights(const TokenSequence& seq) const;

  // embed -> append weight tokens -> transformer -> heads.
  inr::InrWeights predict(const MaskedView& view) const;

  nn::ParamList parameters() const;
  nn::ParamCensus count_params() const;

  // Direct access for tests and surgery (zeroing heads etc.).
  nn::Encoder& encoder() { return encoder_; }
  std::vector<nn::Linear>& heads() { return heads_; }
  ad::Tensor& weight_token_table() { return weight_tokens_; }
  std::vector<ad::Tensor>& inr_biases() { return biases_; }
  // Indexed by INR layer; undefined for predicted layers.
  std::vector<ad::Tensor>& shared_phi() { return phi_; }

 private:
  HypernetConfig config_;
  std::vector<std::pair<std::size_t, std::size_t>> shapes_;
  std::vector<std::size_t> predicted_;
  std::vector<std::size_t> token_offset_;  // per INR layer
  nn::Encoder encoder_;
  ad::Tensor weight_tokens_;      // [K, d]
  std::vector<nn::Linear> heads_;  // per INR layer, d -> in_l; empty if shared
  std::vector<ad::Tensor> biases_;  // per INR layer, [out_l]
  std::vector<ad::Tensor> phi_;     // per INR layer, [in_l, out_l] or empty
};

}  // namespace minr

#endif  // MINR_HYPERNET_HPP_
