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

#include "minr/mae.hpp"

#include <algorithm>

#include "minr/error.hpp"

namespace minr {

MiniMae::MiniMae(const MaeConfig& config, std::uint64_t init_seed)
    : config_(config) {
  SplitMix64 rng(init_seed);
  const std::size_t positions = config.grid.count();
  encoder_ = nn::Encoder::make(config.grid.patch_values(), positions,
                               config.d_model, config.depth, config.heads, rng);
  mask_token_ = nn::truncated_normal({1, config.d_model}, nn::kInitStd, rng);
  dec_embed_ = nn::Linear::make(config.d_model, config.dec_dim, nn::kInitStd, rng);
  dec_pos_ = nn::truncated_normal({positions, config.dec_dim}, nn::kInitStd, rng);
  for (std::size_t i = 0; i < config.dec_depth; ++i)
    dec_blocks_.push_back(
        nn::TransformerBlock::make(config.dec_dim, config.dec_heads, rng));
  dec_norm_ = nn::LayerNorm::make(config.dec_dim);
  head_ = nn::Linear::make(config.dec_dim, config.grid.patch_values(),
                           nn::kInitStd, rng);
  std::fill(head_.bias.mutable_data().begin(), head_.bias.mutable_data().end(), 0.5);
}

ad::Tensor MiniMae::forward(const Image& image, const PatchMask& mask) const {
  if (!(mask.grid == config_.grid)) throw Error("mae_forward: mask grid mismatch");
  const MaskedView view = apply_mask(image, mask);
  const std::size_t visible = view.visible.size();
  const std::size_t pv = config_.grid.patch_values();

  std::vector<std::size_t> positions;
  std::vector<double> values;
  values.reserve(visible * pv);
  for (const auto& v : view.visible) {
    positions.push_back(v.index);
    values.insert(values.end(), v.pixels.begin(), v.pixels.end());
  }

  // Row `visible` of `pool` is the mask token; rows before it are encoder
  // outputs in visible order.
  ad::Tensor pool;
  if (visible > 0) {
    const ad::Tensor patches = ad::Tensor::from({visible, pv}, std::move(values));
    const ad::Tensor encoded =
        encoder_.run_blocks(encoder_.embed(patches, positions));
    const ad::Tensor parts[] = {encoded, mask_token_};
    pool = ad::concat_rows(parts);
  } else {
    pool = mask_token_;
  }

  const std::vector<std::size_t> gather = decoder_gather(mask);
  ad::Tensor x = ad::add(dec_embed_(ad::embedding_lookup(pool, gather)), dec_pos_);
  for (const auto& b : dec_blocks_) x = b(x);
  return head_(dec_norm_(x));
}

std::vector<std::size_t> MiniMae::decoder_gather(const PatchMask& mask) {
  const std::size_t visible = mask.visible_count();
  std::vector<std::size_t> gather(mask.visible.size());
  std::size_t rank = 0;
  for (std::size_t i = 0; i < gather.size(); ++i)
    gather[i] = mask.visible[i] ? rank++ : visible;
  return gather;
}

nn::ParamList MiniMae::parameters() const {
  nn::ParamList out;
  encoder_.collect("encoder", out);
  out.push_back({"decoder.mask_token", mask_token_, false});
  dec_embed_.collect("decoder.embed", out);
  out.push_back({"decoder.pos_embed", dec_pos_, false});
  for (std::size_t i = 0; i < dec_blocks_.size(); ++i)
    dec_blocks_[i].collect("decoder.blocks." + std::to_string(i), out);
  dec_norm_.collect("decoder.norm", out);
  head_.collect("decoder.head", out);
  return out;
}

nn::ParamCensus MiniMae::count_params() const {
  nn::ParamList enc;
  encoder_.collect("encoder", enc);
  nn::ParamCensus c;
  c.transformer = nn::count_values(enc);
  c.decoder = nn::count_values(parameters()) - c.transformer;
  return c;
}

ad::Tensor mae_loss(const ad::Tensor& pred, const Image& target,
                    const PatchMask& mask) {
  const PatchGrid& g = mask.grid;
  if (pred.rank() != 2 || pred.dim(0) != g.count() ||
      pred.dim(1) != g.patch_values()) {
    throw ShapeError("mae_loss: prediction " + ad::shape_string(pred.shape()) +
                     " for " + std::to_string(g.count()) + " patches of " +
                     std::to_string(g.patch_values()) + " values");
  }
  if (target.height != g.height || target.width != g.width)
    throw Error("mae_loss: target size does not match mask grid");
  const std::vector<std::size_t> masked = mask.masked_indices();
  if (masked.empty()) throw Error("mae_loss: no masked patches");
  std::vector<double> t;
  t.reserve(masked.size() * g.patch_values());
  for (std::size_t idx : masked) {
    const auto patch = extract_patch(target, g, idx);
    t.insert(t.end(), patch.begin(), patch.end());
  }
  const ad::Tensor target_rows =
      ad::Tensor::from({masked.size(), g.patch_values()}, std::move(t));
  return ad::mse(ad::embedding_lookup(pred, masked), target_rows);
}

Image patches_to_image(const ad::Tensor& pred, const PatchGrid& grid) {
  Image img(grid.height, grid.width);
  const std::size_t pv = grid.patch_values();
  for (std::size_t i = 0; i < grid.count(); ++i)
    write_patch(img, grid, i, pred.data().data() + i * pv);
  return clamp01(std::move(img));
}

Image paste_visible(Image recon, const Image& source, const PatchMask& mask) {
  for (std::size_t i : mask.visible_indices()) {
    const auto patch = extract_patch(source, mask.grid, i);
    write_patch(recon, mask.grid, i, patch.data());
  }
  return recon;
}

Image mae_reconstruct(const Image& image, const PatchMask& mask,
                      const MiniMae& model) {
  return paste_visible(patches_to_image(model.forward(image, mask), mask.grid),
                       image, mask);
}

}  // namespace minr
