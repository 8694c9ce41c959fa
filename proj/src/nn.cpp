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

#include "minr/nn.hpp"

#include <cmath>

#include "minr/error.hpp"

namespace minr::nn {

std::size_t count_values(const ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.size();
  return n;
}

ad::Tensor truncated_normal(ad::Shape shape, double stddev, SplitMix64& rng) {
  std::vector<double> v(ad::num_elements(shape));
  for (double& x : v) x = rng.truncated_normal(stddev);
  return ad::Tensor::from(std::move(shape), std::move(v), true);
}

ad::Tensor normal(ad::Shape shape, double stddev, SplitMix64& rng) {
  std::vector<double> v(ad::num_elements(shape));
  for (double& x : v) x = rng.normal() * stddev;
  return ad::Tensor::from(std::move(shape), std::move(v), true);
}

Linear Linear::make(std::size_t in, std::size_t out, double stddev,
                    SplitMix64& rng) {
  return Linear{truncated_normal({in, out}, stddev, rng),
                ad::Tensor::zeros({out}, true)};
}

ad::Tensor Linear::operator()(const ad::Tensor& x) const {
  return ad::add(ad::matmul(x, weight), bias);
}

void Linear::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight, true});
  out.push_back({prefix + ".bias", bias, false});
}

LayerNorm LayerNorm::make(std::size_t dim) {
  return LayerNorm{ad::Tensor::full({dim}, 1.0, true),
                   ad::Tensor::zeros({dim}, true)};
}

ad::Tensor LayerNorm::operator()(const ad::Tensor& x) const {
  return ad::layernorm_lastdim(x, gamma, beta);
}

void LayerNorm::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".gamma", gamma, false});
  out.push_back({prefix + ".beta", beta, false});
}

TransformerBlock TransformerBlock::make(std::size_t dim, std::size_t heads,
                                        SplitMix64& rng) {
  if (heads == 0 || dim % heads != 0) {
    throw Error("transformer: d_model " + std::to_string(dim) +
                " is not divisible by " + std::to_string(heads) + " heads");
  }
  TransformerBlock b;
  b.ln1 = LayerNorm::make(dim);
  b.qkv = Linear::make(dim, 3 * dim, kInitStd, rng);
  b.proj = Linear::make(dim, dim, kInitStd, rng);
  b.ln2 = LayerNorm::make(dim);
  b.fc1 = Linear::make(dim, 4 * dim, kInitStd, rng);
  b.fc2 = Linear::make(4 * dim, dim, kInitStd, rng);
  b.heads = heads;
  return b;
}

std::size_t TransformerBlock::param_count(std::size_t dim) {
  const std::size_t norms = 2 * 2 * dim;
  const std::size_t attn = dim * 3 * dim + 3 * dim + dim * dim + dim;
  const std::size_t ffn = dim * 4 * dim + 4 * dim + 4 * dim * dim + dim;
  return norms + attn + ffn;
}

ad::Tensor self_attention(const ad::Tensor& qkv, std::size_t dim,
                          std::size_t heads) {
  const std::size_t dh = dim / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<ad::Tensor> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const ad::Tensor q = ad::slice_lastdim(qkv, h * dh, (h + 1) * dh);
    const ad::Tensor k = ad::slice_lastdim(qkv, dim + h * dh, dim + (h + 1) * dh);
    const ad::Tensor v =
        ad::slice_lastdim(qkv, 2 * dim + h * dh, 2 * dim + (h + 1) * dh);
    const ad::Tensor scores =
        ad::scale(ad::matmul(q, ad::transpose_last2(k)), inv_sqrt);
    outs.push_back(ad::matmul(ad::softmax_lastdim(scores), v));
  }
  return heads == 1 ? outs[0] : ad::concat_lastdim(outs);
}

ad::Tensor TransformerBlock::operator()(const ad::Tensor& x) const {
  const std::size_t dim = x.dim(x.rank() - 1);
  const ad::Tensor attn = self_attention(qkv(ln1(x)), dim, heads);
  const ad::Tensor h = ad::add(x, proj(attn));
  return ad::add(h, fc2(ad::gelu(fc1(ln2(h)))));
}

void TransformerBlock::collect(const std::string& prefix, ParamList& out) const {
  ln1.collect(prefix + ".ln1", out);
  qkv.collect(prefix + ".attn.qkv", out);
  proj.collect(prefix + ".attn.proj", out);
  ln2.collect(prefix + ".ln2", out);
  fc1.collect(prefix + ".mlp.fc1", out);
  fc2.collect(prefix + ".mlp.fc2", out);
}

Encoder Encoder::make(std::size_t patch_values, std::size_t positions,
                      std::size_t dim, std::size_t depth, std::size_t heads,
                      SplitMix64& rng) {
  Encoder e;
  e.patch_embed = Linear::make(patch_values, dim, kInitStd, rng);
  e.pos_embed = truncated_normal({positions, dim}, kInitStd, rng);
  for (std::size_t i = 0; i < depth; ++i)
    e.blocks.push_back(TransformerBlock::make(dim, heads, rng));
  e.norm = LayerNorm::make(dim);
  return e;
}

ad::Tensor Encoder::embed(const ad::Tensor& patches,
                          std::span<const std::size_t> positions) const {
  if (patches.rank() != 2 || patches.dim(0) != positions.size()) {
    throw ShapeError("embed_patches: " + ad::shape_string(patches.shape()) +
                     " patches for " + std::to_string(positions.size()) +
                     " positions");
  }
  for (std::size_t p : positions) {
    if (p >= this->positions()) {
      throw Error("embed_patches: position " + std::to_string(p) +
                  " out of range for " + std::to_string(this->positions()) +
                  " patches");
    }
  }
  return ad::add(patch_embed(patches), ad::embedding_lookup(pos_embed, positions));
}

ad::Tensor Encoder::run_blocks(const ad::Tensor& tokens) const {
  ad::Tensor x = tokens;
  for (const auto& b : blocks) x = b(x);
  return norm(x);
}

void Encoder::collect(const std::string& prefix, ParamList& out) const {
  patch_embed.collect(prefix + ".patch_embed", out);
  out.push_back({prefix + ".pos_embed", pos_embed, false});
  for (std::size_t i = 0; i < blocks.size(); ++i)
    blocks[i].collect(prefix + ".blocks." + std::to_string(i), out);
  norm.collect(prefix + ".norm", out);
}

}  // namespace minr::nn
