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

#include "minr/hypernet.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "minr/error.hpp"

namespace minr {
namespace {

// He-style scale for hidden layers, unit gain for the linear output layer.
double inr_weight_std(std::size_t fan_in, bool last) {
  return std::sqrt((last ? 1.0 : 2.0) / static_cast<double>(fan_in));
}

ad::Tensor patch_matrix(std::span<const VisiblePatch> visible,
                        std::size_t patch_values) {
  std::vector<double> values;
  values.reserve(visible.size() * patch_values);
  for (const auto& v : visible) {
    if (v.pixels.size() != patch_values) {
      throw ShapeError("embed_patches: patch of " +
                       std::to_string(v.pixels.size()) + " values, expected " +
                       std::to_string(patch_values));
    }
    values.insert(values.end(), v.pixels.begin(), v.pixels.end());
  }
  return ad::Tensor::from({visible.size(), patch_values}, std::move(values));
}

}  // namespace

Hypernet::Hypernet(const HypernetConfig& config, std::uint64_t init_seed)
    : config_(config) {
  shapes_ = inr::layer_shapes(config.features.dim(), config.inr_width,
                              config.inr_layers);
  const std::size_t layers = shapes_.size();
  if (config.mode == HeadMode::ginr) {
    if (config.ginr_layer < 1 || config.ginr_layer > layers) {
      throw Error("ginr_specific_layer " + std::to_string(config.ginr_layer) +
                  " outside 1.." + std::to_string(layers));
    }
    predicted_ = {config.ginr_layer - 1};
  } else {
    predicted_.resize(layers);
    std::iota(predicted_.begin(), predicted_.end(), std::size_t{0});
  }

  SplitMix64 rng(init_seed);
  encoder_ = nn::Encoder::make(config.grid.patch_values(), config.grid.count(),
                               config.d_model, config.depth, config.heads, rng);

  std::size_t tokens = 0;
  token_offset_.assign(layers, 0);
  for (std::size_t l : predicted_) {
    token_offset_[l] = tokens;
    tokens += shapes_[l].second;
  }
  weight_tokens_ = nn::truncated_normal({tokens, config.d_model}, nn::kInitStd, rng);

  heads_.resize(layers);
  phi_.resize(layers);
  biases_.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const auto [in, out] = shapes_[l];
    const bool last = l + 1 == layers;
    const bool predicted =
        std::find(predicted_.begin(), predicted_.end(), l) != predicted_.end();
    if (predicted) {
      // Token outputs leave the final layer norm with unit variance, so this
      // scale gives predicted columns the same variance as phi below.
      const double stddev = inr_weight_std(in, last) /
                            std::sqrt(static_cast<double>(config.d_model));
      heads_[l] = nn::Linear{nn::normal({config.d_model, in}, stddev, rng),
                             ad::Tensor::zeros({in}, true)};
    } else {
      phi_[l] = nn::normal({in, out}, inr_weight_std(in, last), rng);
    }
    biases_[l] = ad::Tensor::full({out}, last ? 0.5 : 0.0, true);
  }
}

TokenSequence Hypernet::embed_patches(std::span<const VisiblePatch> visible) const {
  std::vector<std::size_t> positions;
  positions.reserve(visible.size());
  for (const auto& v : visible) positions.push_back(v.index);
  if (visible.empty()) {
    return {ad::Tensor(), 0, 0};
  }
  const ad::Tensor patches =
      patch_matrix(visible, config_.grid.patch_values());
  return {encoder_.embed(patches, positions), visible.size(), 0};
}

TokenSequence Hypernet::append_weight_tokens(const TokenSequence& prefix) const {
  if (prefix.weight_tokens != 0)
    throw Error("append_weight_tokens: sequence already has weight tokens");
  if (prefix.patch_tokens == 0) {
    return {weight_tokens_, 0, weight_token_count()};
  }
  const ad::Tensor parts[] = {prefix.tokens, weight_tokens_};
  return {ad::concat_rows(parts), prefix.patch_tokens, weight_token_count()};
}

TokenSequence Hypernet::transformer_forward(const TokenSequence& seq) const {
  if (seq.tokens.rank() != 2 || seq.tokens.dim(1) != config_.d_model ||
      seq.tokens.dim(0) != seq.length()) {
    throw ShapeError("transformer_forward: tokens " +
                     ad::shape_string(seq.tokens.shape()) + " for layout " +
                     std::to_string(seq.patch_tokens) + "+" +
                     std::to_string(seq.weight_tokens) + " at d_model " +
                     std::to_string(config_.d_model));
  }
  return {encoder_.run_blocks(seq.tokens), seq.patch_tokens, seq.weight_tokens};
}

inr::InrWeights Hypernet::predict_weights(const TokenSequence& seq) const {
  if (seq.weight_tokens != weight_token_count() ||
      seq.tokens.dim(0) != seq.length()) {
    throw ShapeError("predict_weights: " + std::to_string(seq.weight_tokens) +
                     " weight tokens for " +
                     std::to_string(weight_token_count()) + " predicted columns");
  }
  inr::InrWeights w;
  w.activation = config_.activation;
  w.features = config_.features;
  w.layers.resize(shapes_.size());
  for (std::size_t l = 0; l < shapes_.size(); ++l) {
    w.layers[l].bias = biases_[l];
    if (phi_[l].defined()) {
      w.layers[l].weight = phi_[l];
      continue;
    }
    const std::size_t out = shapes_[l].second;
    std::vector<std::size_t> rows(out);
    std::iota(rows.begin(), rows.end(), seq.patch_tokens + token_offset_[l]);
    const ad::Tensor columns = heads_[l](ad::embedding_lookup(seq.tokens, rows));
    w.layers[l].weight = ad::transpose_last2(columns);
  }
  return w;
}

inr::InrWeights Hypernet::predict(const MaskedView& view) const {
  return predict_weights(
      transformer_forward(append_weight_tokens(embed_patches(view.visible))));
}

nn::ParamList Hypernet::parameters() const {
  nn::ParamList out;
  encoder_.collect("encoder", out);
  out.push_back({"weight_tokens", weight_tokens_, false});
  for (std::size_t l = 0; l < shapes_.size(); ++l) {
    const std::string idx = std::to_string(l + 1);
    if (heads_[l].weight.defined()) heads_[l].collect("heads." + idx, out);
    if (phi_[l].defined()) out.push_back({"phi." + idx + ".weight", phi_[l], true});
    out.push_back({"inr." + idx + ".bias", biases_[l], false});
  }
  return out;
}

nn::ParamCensus Hypernet::count_params() const {
  nn::ParamList enc;
  encoder_.collect("encoder", enc);
  nn::ParamCensus c;
  c.transformer = nn::count_values(enc);
  c.weight_tokens = weight_tokens_.size();
  for (std::size_t l = 0; l < shapes_.size(); ++l) {
    if (heads_[l].weight.defined())
      c.heads += heads_[l].weight.size() + heads_[l].bias.size();
    if (phi_[l].defined()) c.shared_phi += phi_[l].size();
    c.biases += biases_[l].size();
  }
  return c;
}

}  // namespace minr
