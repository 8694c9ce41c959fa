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

#include "minr/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>

#include "minr/config.hpp"
#include "minr/error.hpp"
#include "minr/rng.hpp"

namespace minr {
namespace {

std::string dir_domain(const std::filesystem::path& dir) {
  std::string domain = dir.filename().string();
  if (domain.empty()) domain = dir.parent_path().filename().string();
  return domain;
}

double smoothstep_edge(double d, double softness) {
  return 1.0 / (1.0 + std::exp(-d / softness));
}

void random_color(SplitMix64& rng, double lo, double hi, double out[3]) {
  for (int c = 0; c < 3; ++c) out[c] = rng.uniform(lo, hi);
}

Image synth_faces(std::size_t size, SplitMix64& rng) {
  Image img(size, size);
  double top[3], bottom[3], skin[3], feature[3];
  random_color(rng, 0.1, 0.6, top);
  random_color(rng, 0.1, 0.6, bottom);
  random_color(rng, 0.45, 0.95, skin);
  random_color(rng, 0.0, 0.3, feature);
  const double cx = rng.uniform(-0.04, 0.04);
  const double cy = rng.uniform(-0.04, 0.04);
  const double rx = rng.uniform(0.45, 0.62);
  const double ry = rng.uniform(0.58, 0.8);
  const double eye_dx = rng.uniform(0.16, 0.26);
  const double eye_y = cy - rng.uniform(0.12, 0.24);
  const double eye_s = rng.uniform(0.06, 0.1);
  const double mouth_y = cy + rng.uniform(0.25, 0.38);
  const double mouth_w = rng.uniform(0.12, 0.22);
  const double mouth_h = rng.uniform(0.04, 0.07);

  for (std::size_t r = 0; r < size; ++r) {
    const double v = (2.0 * r + 1.0) / size - 1.0;
    for (std::size_t c = 0; c < size; ++c) {
      const double u = (2.0 * c + 1.0) / size - 1.0;
      const double t = 0.5 * (v + 1.0);
      const double du = (u - cx) / rx;
      const double dv = (v - cy) / ry;
      const double face = smoothstep_edge(1.0 - std::sqrt(du * du + dv * dv), 0.06);
      const double ex = std::abs(u - cx) - eye_dx;  // symmetric about cx
      const double ey = v - eye_y;
      const double eyes = std::exp(-(ex * ex + ey * ey) / (2 * eye_s * eye_s));
      const double mx = (u - cx) / mouth_w;
      const double my = (v - mouth_y) / mouth_h;
      const double mouth = std::exp(-0.5 * (mx * mx + my * my));
      const double feat = std::min(1.0, eyes + mouth);
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double bg = top[ch] * (1 - t) + bottom[ch] * t;
        const double fg = skin[ch] * (1 - feat) + feature[ch] * feat;
        img.at(r, c, ch) = std::clamp(bg * (1 - face) + fg * face, 0.0, 1.0);
      }
    }
  }
  return img;
}

Image synth_scenes(std::size_t size, SplitMix64& rng) {
  Image img(size, size);
  double base[3], slope[3], ripple[3];
  random_color(rng, 0.25, 0.75, base);
  random_color(rng, -0.35, 0.35, slope);
  random_color(rng, 0.05, 0.15, ripple);
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double freq = rng.uniform(3.0, 7.0);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double dx = std::cos(theta), dy = std::sin(theta);

  for (std::size_t r = 0; r < size; ++r) {
    const double v = (2.0 * r + 1.0) / size - 1.0;
    for (std::size_t c = 0; c < size; ++c) {
      const double u = (2.0 * c + 1.0) / size - 1.0;
      const double p = dx * u + dy * v;
      const double wave = std::sin(std::numbers::pi * freq * p + phase);
      for (std::size_t ch = 0; ch < 3; ++ch)
        img.at(r, c, ch) = base[ch] + slope[ch] * p + ripple[ch] * wave;
    }
  }

  const std::size_t occluders = 3 + rng.below(4);
  for (std::size_t k = 0; k < occluders; ++k) {
    double color[3];
    random_color(rng, 0.0, 1.0, color);
    const auto h = static_cast<std::size_t>(size * rng.uniform(0.1, 0.45)) + 1;
    const auto w = static_cast<std::size_t>(size * rng.uniform(0.1, 0.45)) + 1;
    const std::size_t r0 = rng.below(size - std::min(h, size) + 1);
    const std::size_t c0 = rng.below(size - std::min(w, size) + 1);
    for (std::size_t r = r0; r < std::min(size, r0 + h); ++r)
      for (std::size_t c = c0; c < std::min(size, c0 + w); ++c)
        for (std::size_t ch = 0; ch < 3; ++ch) img.at(r, c, ch) = color[ch];
  }
  return clamp01(std::move(img));
}

}  // namespace

const ImageInstance* DatasetSplit::find(std::string_view id) const {
  for (const auto* set : {&train, &test})
    for (const auto& inst : *set)
      if (inst.id == id) return &inst;
  return nullptr;
}

DatasetSplit split_instances(std::vector<ImageInstance> instances,
                             std::string domain, std::uint64_t split_seed,
                             std::optional<std::size_t> test_count) {
  const std::size_t n = instances.size();
  std::size_t n_test =
      test_count ? *test_count : (n >= 2 ? std::max<std::size_t>(1, n / 10) : 0);
  if (n_test > n) throw Error("split: test_count exceeds dataset size");

  std::vector<std::pair<std::uint64_t, std::size_t>> keys;
  for (std::size_t i = 0; i < n; ++i)
    keys.emplace_back(mix_seed({split_seed, hash_string(instances[i].id)}), i);
  std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first
                              : instances[a.second].id < instances[b.second].id;
  });

  DatasetSplit split;
  split.domain = std::move(domain);
  split.split_seed = split_seed;
  for (std::size_t k = 0; k < n; ++k) {
    auto& dst = k < n_test ? split.test : split.train;
    dst.push_back(std::move(instances[keys[k].second]));
  }
  const auto by_id = [](const ImageInstance& a, const ImageInstance& b) {
    return a.id < b.id;
  };
  std::sort(split.train.begin(), split.train.end(), by_id);
  std::sort(split.test.begin(), split.test.end(), by_id);
  return split;
}

DatasetSplit load_dir(const std::filesystem::path& dir, std::size_t target_size,
                      std::size_t patch_size, std::uint64_t split_seed,
                      std::optional<std::size_t> test_count) {
  if (patch_size == 0 || target_size % patch_size != 0) {
    throw Error("load_dir: patch size " + std::to_string(patch_size) +
                " does not divide " + std::to_string(target_size));
  }
  if (!std::filesystem::is_directory(dir))
    throw Error("load_dir: not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<ImageInstance> instances;
  for (const auto& f : files) {
    try {
      Image img = read_image(f);
      img = clamp01(resize_bilinear(center_crop_square(img), target_size,
                                    target_size));
      instances.push_back({f.stem().string(), std::move(img),
                           dir.filename().string()});
    } catch (const Error& e) {
      std::cerr << "warning: skipping " << f.string() << ": " << e.what() << "\n";
    }
  }
  if (instances.empty()) throw Error("load_dir: no readable images in " + dir.string());
  return split_instances(std::move(instances), dir_domain(dir), split_seed,
                         test_count);
}

std::string_view synth_name(SynthKind kind) {
  return kind == SynthKind::faces_like ? "faces_like" : "scenes_like";
}

SynthKind parse_synth(std::string_view name) {
  if (name == "faces_like") return SynthKind::faces_like;
  if (name == "scenes_like") return SynthKind::scenes_like;
  throw Error("unknown synthetic domain '" + std::string(name) + "'");
}

Image synth_image(SynthKind kind, std::size_t size, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return kind == SynthKind::faces_like ? synth_faces(size, rng)
                                       : synth_scenes(size, rng);
}

DatasetSplit synth_domain(SynthKind kind, std::size_t count, std::size_t size,
                          std::uint64_t seed,
                          std::optional<std::size_t> test_count) {
  if (count < 2) throw Error("synth_domain: count must be at least 2");
  const std::string domain(synth_name(kind));
  std::vector<ImageInstance> instances;
  instances.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    char id[64];
    std::snprintf(id, sizeof(id), "%s-%04zu", domain.c_str(), i);
    const std::uint64_t s = mix_seed({seed, hash_string(domain), i});
    instances.push_back({id, synth_image(kind, size, s), domain});
  }
  return split_instances(std::move(instances), domain, seed, test_count);
}

std::string source_domain(std::string_view source) {
  const auto colon = source.find(':');
  if (colon == std::string_view::npos) return std::string(source);
  const std::string_view rest = source.substr(colon + 1);
  if (source.substr(0, colon) == "dir") return dir_domain(std::filesystem::path(rest));
  return std::string(rest);
}

DatasetSplit load_source(std::string_view source, const Config& config) {
  const auto colon = source.find(':');
  if (colon == std::string_view::npos)
    throw Error("data.source must be dir:<path> or synth:<kind>, got '" +
                std::string(source) + "'");
  const std::string_view scheme = source.substr(0, colon);
  const std::string_view rest = source.substr(colon + 1);
  const auto size = static_cast<std::size_t>(config.get_int("data.size"));
  const std::uint64_t seed = config.get_seed("data.seed");
  const std::int64_t tc = config.get_int("data.test_count");
  const std::optional<std::size_t> test_count =
      tc >= 0 ? std::optional<std::size_t>(static_cast<std::size_t>(tc))
              : std::nullopt;
  const auto patch = static_cast<std::size_t>(config.get_int("model.patch"));
  if (patch == 0 || size % patch != 0)
    throw Error("data.size " + std::to_string(size) +
                " is not divisible by model.patch " + std::to_string(patch));
  if (scheme == "synth") {
    return synth_domain(parse_synth(rest),
                        static_cast<std::size_t>(config.get_int("data.count")),
                        size, seed, test_count);
  }
  if (scheme == "dir") {
    return load_dir(std::filesystem::path(rest), size, patch, seed, test_count);
  }
  throw Error("unknown data source scheme '" + std::string(scheme) + "'");
}

}  // namespace minr
