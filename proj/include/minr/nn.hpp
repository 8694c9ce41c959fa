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

#ifndef MINR_NN_HPP_
#define MINR_NN_HPP_

// Transformer building blocks shared by the hypernetwork and the MAE
// baseline.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "minr/autodiff.hpp"
#include "minr/rng.hpp"

namespace minr::nn {

// A named trainable tensor. `decay` marks matrices that receive decoupled
// weight decay; biases, norms, and embeddings do not.
struct Param {
  std::string name;
  ad::Tensor tensor;
  bool decay = false;
};

using ParamList = std::vector<Param>;

std::size_t count_values(const ParamList& params);

ad::Tensor truncated_normal(ad::Shape shape, double stddev, SplitMix64& rng);
ad::Tensor normal(ad::Shape shape, double stddev, SplitMix64& rng);

struct Linear {
  ad::Tensor weight;  // [in, out]
  ad::Tensor bias;    // [out]

  static Linear make(std::size_t in, std::size_t out, double stddev,
                     SplitMix64& rng);
  ad::Tensor operator()(const ad::Tensor& x) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

struct LayerNorm {
  ad::Tensor gamma;
  ad::Tensor beta;

  static LayerNorm make(std::size_t dim);
  ad::Tensor operator()(const ad::Tensor& x) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

// Pre-norm encoder block:
//   x += proj(attention(ln1(x)));  x += fc2(gelu(fc1(ln2(x))))
struct TransformerBlock {
  LayerNorm ln1;
  Linear qkv;  // d -> 3d, [q | k | v] with heads contiguous inside each
  Linear proj;
  LayerNorm ln2;
  Linear fc1;  // d -> 4d
  Linear fc2;
  std::size_t heads = 1;

  static TransformerBlock make(std::size_t dim, std::size_t heads,
                               SplitMix64& rng);
  ad::Tensor operator()(const ad::Tensor& x) const;
  void collect(const std::string& prefix, ParamList& out) const;
  static std::size_t param_count(std::size_t dim);
};

// Full bidirectional multi-head self-attention over rows of x [T, d],
// without the output projection.
ad::Tensor self_attention(const ad::Tensor& qkv, std::size_t dim,
                          std::size_t heads);

// Patch embedding + learned position table + block stack + final norm.
struct Encoder {
  Linear patch_embed;
  ad::Tensor pos_embed;  // [P, d]
  std::vector<TransformerBlock> blocks;
  LayerNorm norm;

  static Encoder make(std::size_t patch_values, std::size_t positions,
                      std::size_t dim, std::size_t depth, std::size_t heads,
                      SplitMix64& rng);
  std::size_t dim() const { return pos_embed.dim(1); }
  std::size_t positions() const { return pos_embed.dim(0); }

  // patches [V, p*p*3] with their original patch indices -> tokens [V, d].
  ad::Tensor embed(const ad::Tensor& patches,
                   std::span<const std::size_t> positions) const;
  ad::Tensor run_blocks(const ad::Tensor& tokens) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

inline constexpr double kInitStd = 0.02;

// Trainable parameter counts by role. `transformer` covers patch embedding,
// position table, blocks and the final norm of the (encoder) transformer.
struct ParamCensus {
  std::size_t transformer = 0;
  std::size_t heads = 0;
  std::size_t weight_tokens = 0;
  std::size_t shared_phi = 0;
  std::size_t biases = 0;
  std::size_t decoder = 0;  // MAE only, includes the mask token

  std::size_t total() const {
    return transformer + heads + weight_tokens + shared_phi + biases + decoder;
  }
};

}  // namespace minr::nn

#endif  // MINR_NN_HPP_
