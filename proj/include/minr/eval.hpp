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

#ifndef MINR_EVAL_HPP_
#define MINR_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "minr/data.hpp"
#include "minr/image.hpp"
#include "minr/masking.hpp"
#include "minr/model.hpp"
#include "minr/nn.hpp"

namespace minr {

// 10 log10(1 / MSE) with peak 1. Identical inputs give +infinity.
double psnr(const Image& pred, const Image& target);
// Restricted to pixels whose `region` entry (one per pixel) is nonzero.
double psnr(const Image& pred, const Image& target,
            std::span<const std::uint8_t> region);

// "inf" for +infinity, otherwise %.6f.
std::string format_psnr(double db);

enum class Variant { raw, pasted };
std::string_view variant_name(Variant v);

struct EvalRow {
  std::string model;
  Variant variant = Variant::pasted;
  std::string train_domain;
  std::string test_domain;
  MaskStrategy strategy = MaskStrategy::random;
  double ratio = 0.0;
  double psnr_full = 0.0;
  double psnr_masked = 0.0;
  std::size_t instances = 0;
  nn::ParamCensus census;
};

struct EvalReport {
  std::vector<EvalRow> rows;

  static std::string csv_header();
  std::string to_csv() const;
  // First row matching the key, or nullptr.
  const EvalRow* find(std::string_view model, Variant variant,
                      std::string_view test_domain, MaskStrategy strategy,
                      double ratio) const;
};

// A trained model plus the domain it was trained on.
struct EvalModel {
  const Model* model = nullptr;
  std::string name;          // defaults to the mode name when empty
  std::string train_domain;
};

struct TestSet {
  std::string domain;
  std::span<const ImageInstance> instances;
};

struct EvalOptions {
  std::vector<MaskStrategy> strategies{MaskStrategy::random, MaskStrategy::block};
  std::vector<double> ratios{0.75};
  std::uint64_t seed = 4;
  std::size_t threads = 1;
};

// Seed of an instance's evaluation mask; depends only on the eval seed and
// the instance id so every model sees the same masks.
std::uint64_t eval_mask_seed(std::uint64_t eval_seed, std::string_view id);

// Rows are ordered by (model, test domain, strategy, ratio, variant) in the
// order the inputs were given. Per-condition PSNR is the mean over instances.
EvalReport evaluate(std::span<const EvalModel> models,
                    std::span<const TestSet> tests, const EvalOptions& options);

// One row per instance: masked input | each model's pasted reconstruction |
// ground truth. Tiles are placed edge to edge.
Image gallery_image(std::span<const Model* const> models,
                    std::span<const ImageInstance> instances,
                    MaskStrategy strategy, double ratio, std::uint64_t eval_seed);

void emit_gallery(const std::filesystem::path& path,
                  std::span<const Model* const> models,
                  std::span<const ImageInstance> instances,
                  MaskStrategy strategy, double ratio, std::uint64_t eval_seed);

}  // namespace minr

#endif  // MINR_EVAL_HPP_
