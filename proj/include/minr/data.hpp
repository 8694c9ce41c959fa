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

#ifndef MINR_DATA_HPP_
#define MINR_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minr/image.hpp"

namespace minr {

class Config;

struct ImageInstance {
  std::string id;
  Image pixels;
  std::string domain;
};

struct DatasetSplit {
  std::vector<ImageInstance> train;
  std::vector<ImageInstance> test;
  std::string domain;
  std::uint64_t split_seed = 0;

  const ImageInstance* find(std::string_view id) const;
};

// Orders instances by mix(split_seed, hash(id)) and sends the first
// `test_count` to test (default max(1, N / 10) for N >= 2). Both halves end up
// sorted by id, so the result ignores input order.
DatasetSplit split_instances(std::vector<ImageInstance> instances,
                             std::string domain, std::uint64_t split_seed,
                             std::optional<std::size_t> test_count = {});

// Reads every PNG/PPM under `dir` (non-recursive), center-crops to a square
// and resizes to target_size. Unreadable files are skipped with a warning on
// stderr; an empty result is an error.
DatasetSplit load_dir(const std::filesystem::path& dir, std::size_t target_size,
                      std::size_t patch_size, std::uint64_t split_seed,
                      std::optional<std::size_t> test_count = {});

enum class SynthKind { faces_like, scenes_like };

std::string_view synth_name(SynthKind kind);
SynthKind parse_synth(std::string_view name);

// faces_like: centered, left-right symmetric soft ellipse with blob features
// over a smooth vertical gradient. scenes_like: oriented gradient with a
// sinusoidal ripple and hard-edged rectangular occluders.
Image synth_image(SynthKind kind, std::size_t size, std::uint64_t seed);

DatasetSplit synth_domain(SynthKind kind, std::size_t count, std::size_t size,
                          std::uint64_t seed,
                          std::optional<std::size_t> test_count = {});

// `dir:<path>` or `synth:<kind>` with data.size / data.count / data.seed /
// data.test_count from the config.
// Domain label a source produces: the synth kind or the directory name.
std::string source_domain(std::string_view source);

DatasetSplit load_source(std::string_view source, const Config& config);

}  // namespace minr

#endif  // MINR_DATA_HPP_
