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

#ifndef MINR_TRAINING_HPP_
#define MINR_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minr/autodiff.hpp"
#include "minr/config.hpp"
#include "minr/data.hpp"
#include "minr/masking.hpp"
#include "minr/nn.hpp"

namespace minr {

class Model;

// Mean over pixels of the squared L2 norm of the RGB residual: the channel
// sum is not divided by 3. Covers every pixel, masked or visible.
ad::Tensor instance_loss(const ad::Tensor& pred, const ad::Tensor& target);

// (1/N) sum_n objective(instance n, mask n).
ad::Tensor batch_loss(const Model& model, std::span<const Image* const> batch,
                      std::span<const PatchMask> masks);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  void resize_for(const nn::ParamList& params);
};

// Bias-corrected Adam; decoupled weight decay on params flagged `decay`.
// Reads each parameter's accumulated gradient (absent = zero). Throws
// naming the parameter when a gradient is non-finite.
void adam_step(const nn::ParamList& params, AdamState& state,
               const AdamConfig& config, std::uint64_t step);

// Versioned binary checkpoint:
//   "MINRCKPT" | u32 version | u64 len | config text | u64 step | u64 count |
//   count x (u32 name len | name | u32 rank | rank x u64 dim | f64 payload)
// All integers and floats little-endian.
struct NamedArray {
  std::string name;
  ad::Shape shape;
  std::vector<double> values;

  bool operator==(const NamedArray&) const = default;
};

struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::uint32_t version = kVersion;
  std::string config_text;
  std::uint64_t step = 0;
  std::vector<NamedArray> tensors;

  std::vector<std::uint8_t> serialize() const;
  static Checkpoint parse(std::span<const std::uint8_t> bytes);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  const NamedArray* find(std::string_view name) const;
  Config config() const;

  bool operator==(const Checkpoint&) const = default;
};

inline constexpr std::string_view kMomentPrefixM = "adam.m/";
inline constexpr std::string_view kMomentPrefixV = "adam.v/";

Checkpoint capture(const Model& model, const AdamState& state,
                   const Config& config, std::uint64_t step);
// Copies parameter values (and moments, when present) by name.
void restore(const Checkpoint& ckpt, const Model& model, AdamState* state);

struct TrainOptions {
  std::filesystem::path out_dir;           // empty: nothing written
  std::optional<Checkpoint> resume;        // continue from this state
  std::ostream* log = nullptr;             // progress lines
  std::size_t log_every = 100;
};

struct TrainResult {
  Checkpoint final;
  std::vector<double> losses;  // one per step executed in this call
};

// Sample g = step * batch + b (0-based) of the stream reads position
// g % N of the epoch-(g / N) permutation of the training split; its mask
// seed is instance_mask_seed(mask.seed, instance, fixed ? 0 : epoch).
std::size_t sample_instance(std::uint64_t data_seed, std::size_t n,
                            std::uint64_t global_sample);

TrainResult train(const Config& config, const DatasetSplit& data,
                  const TrainOptions& options = {});

AdamConfig adam_config(const Config& config);

std::string format_loss_csv(std::uint64_t first_step,
                            std::span<const double> losses);

}  // namespace minr

#endif  // MINR_TRAINING_HPP_
