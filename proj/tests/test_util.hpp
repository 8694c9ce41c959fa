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

#ifndef MINR_TESTS_TEST_UTIL_HPP_
#define MINR_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "minr/config.hpp"
#include "minr/hypernet.hpp"
#include "minr/image.hpp"
#include "minr/mae.hpp"
#include "minr/rng.hpp"

namespace minr::testing {

inline Image random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Image img(h, w);
  for (double& v : img.pixels) v = rng.uniform();
  return img;
}

inline HypernetConfig tiny_hypernet(HeadMode mode = HeadMode::transinr) {
  HypernetConfig c;
  c.mode = mode;
  c.grid = PatchGrid::make(8, 8, 4);
  c.d_model = 8;
  c.depth = 1;
  c.heads = 2;
  c.inr_width = 6;
  c.inr_layers = 3;
  c.features.num_frequencies = 1;
  return c;
}

inline MaeConfig tiny_mae() {
  MaeConfig c;
  c.grid = PatchGrid::make(8, 8, 4);
  c.d_model = 8;
  c.depth = 1;
  c.heads = 2;
  c.dec_dim = 8;
  c.dec_depth = 1;
  c.dec_heads = 2;
  return c;
}

// A fast config for training-loop tests: 16x16 synthetic faces.
inline Config tiny_config() {
  Config c = Config::defaults();
  c.set("data.size", "16");
  c.set("data.count", "6");
  c.set("data.test_count", "2");
  c.set("model.patch", "4");
  c.set("model.d_model", "8");
  c.set("model.depth", "1");
  c.set("model.heads", "2");
  c.set("model.inr_width", "8");
  c.set("model.inr_layers", "3");
  c.set("model.fourier_frequencies", "2");
  c.set("baseline.dec_dim", "8");
  c.set("baseline.dec_depth", "1");
  c.set("baseline.dec_heads", "2");
  c.set("train.steps", "6");
  c.set("train.batch_size", "2");
  c.set("train.lr", "1e-3");
  c.set("train.checkpoint_every", "3");
  return c;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh directory under the test binary's working directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::current_path() / "scratch" / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace minr::testing

#endif  // MINR_TESTS_TEST_UTIL_HPP_
