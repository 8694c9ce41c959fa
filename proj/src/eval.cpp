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

#include "minr/eval.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "minr/error.hpp"
#include "minr/rng.hpp"

namespace minr {
namespace {

void check_same_shape(const Image& a, const Image& b) {
  if (a.height != b.height || a.width != b.width || a.pixels.size() != b.pixels.size())
    throw ShapeError("psnr: image shapes differ");
}

double psnr_from_sse(double sse, std::size_t n) {
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / (sse / static_cast<double>(n)));
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
// is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string census_csv(const nn::ParamCensus& c) {
  return std::to_string(c.transformer) + "," + std::to_string(c.heads) + "," +
         std::to_string(c.weight_tokens) + "," + std::to_string(c.shared_phi) +
         "," + std::to_string(c.biases) + "," + std::to_string(c.decoder) + "," +
         std::to_string(c.total());
}

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

double psnr(const Image& pred, const Image& target) {
  check_same_shape(pred, target);
  if (pred.pixels.empty()) throw Error("psnr: empty region");
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.pixels.size(); ++i) {
    const double d = pred.pixels[i] - target.pixels[i];
    sse += d * d;
  }
  return psnr_from_sse(sse, pred.pixels.size());
}

double psnr(const Image& pred, const Image& target,
            std::span<const std::uint8_t> region) {
  check_same_shape(pred, target);
  if (region.size() != pred.height * pred.width)
    throw ShapeError("psnr: region has " + std::to_string(region.size()) +
                     " entries for " + std::to_string(pred.height * pred.width) +
                     " pixels");
  double sse = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < region.size(); ++p) {
    if (!region[p]) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = pred.pixels[p * 3 + c] - target.pixels[p * 3 + c];
      sse += d * d;
    }
    n += 3;
  }
  if (n == 0) throw Error("psnr: empty region");
  return psnr_from_sse(sse, n);
}

std::string format_psnr(double db) {
  if (std::isinf(db) && db > 0) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", db);
  return buf;
}

std::string_view variant_name(Variant v) {
  return v == Variant::raw ? "raw" : "pasted";
}

std::string EvalReport::csv_header() {
  return "model,variant,train_domain,test_domain,strategy,ratio,psnr_full,"
         "psnr_masked,instances,params_transformer,params_heads,"
         "params_weight_tokens,params_shared_phi,params_biases,params_decoder,"
         "params_total";
}

std::string EvalReport::to_csv() const {
  std::string out = csv_header() + "\n";
  char ratio[32];
  for (const auto& r : rows) {
    std::snprintf(ratio, sizeof(ratio), "%g", r.ratio);
    out += r.model + "," + std::string(variant_name(r.variant)) + "," +
           r.train_domain + "," + r.test_domain + "," +
           std::string(strategy_name(r.strategy)) + "," + ratio + "," +
           format_psnr(r.psnr_full) + "," + format_psnr(r.psnr_masked) + "," +
           std::to_string(r.instances) + "," + census_csv(r.census) + "\n";
  }
  return out;
}

const EvalRow* EvalReport::find(std::string_view model, Variant variant,
                                std::string_view test_domain,
                                MaskStrategy strategy, double ratio) const {
  for (const auto& r : rows) {
    if (r.model == model && r.variant == variant && r.test_domain == test_domain &&
        r.strategy == strategy && r.ratio == ratio)
      return &r;
  }
  return nullptr;
}

std::uint64_t eval_mask_seed(std::uint64_t eval_seed, std::string_view id) {
  return mix_seed({eval_seed, hash_string("eval"), hash_string(id)});
}

EvalReport evaluate(std::span<const EvalModel> models,
                    std::span<const TestSet> tests, const EvalOptions& options) {
  EvalReport report;
  for (const auto& em : models) {
    if (!em.model) throw Error("evaluate: null model");
    const Model& model = *em.model;
    const PatchGrid& grid = model.grid();
    const std::string name =
        em.name.empty() ? std::string(mode_name(model.mode())) : em.name;
    const nn::ParamCensus census = model.count_params();
    for (const auto& test : tests) {
      if (test.instances.empty())
        throw Error("evaluate: test split '" + test.domain + "' is empty");
      for (const auto& inst : test.instances) {
        if (inst.pixels.height != grid.height || inst.pixels.width != grid.width)
          throw Error("evaluate: instance " + inst.id + " is " +
                      std::to_string(inst.pixels.height) + "x" +
                      std::to_string(inst.pixels.width) + ", model expects " +
                      std::to_string(grid.height) + "x" + std::to_string(grid.width));
      }
      for (MaskStrategy strategy : options.strategies) {
        for (double ratio : options.ratios) {
          const std::size_t n = test.instances.size();
          // [raw full, raw masked, pasted full, pasted masked] per instance.
          std::vector<std::array<double, 4>> scores(n);
          parallel_for(n, options.threads, [&](std::size_t i) {
            const Image& truth = test.instances[i].pixels;
            const PatchMask mask = make_mask(
                grid, strategy, ratio, eval_mask_seed(options.seed, test.instances[i].id));
            const auto region = pixel_mask(mask);
            const Image raw = model.reconstruct(truth, mask);
            const Image pasted = paste_visible(raw, truth, mask);
            scores[i] = {psnr(raw, truth), psnr(raw, truth, region),
                         psnr(pasted, truth), psnr(pasted, truth, region)};
          });
          for (Variant v : {Variant::raw, Variant::pasted}) {
            const std::size_t off = v == Variant::raw ? 0 : 2;
            std::vector<double> full(n), masked(n);
            for (std::size_t i = 0; i < n; ++i) {
              full[i] = scores[i][off];
              masked[i] = scores[i][off + 1];
            }
            EvalRow row;
            row.model = name;
            row.variant = v;
            row.train_domain = em.train_domain;
            row.test_domain = test.domain;
            row.strategy = strategy;
            row.ratio = ratio;
            row.psnr_full = mean(full);
            row.psnr_masked = mean(masked);
            row.instances = n;
            row.census = census;
            report.rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  return report;
}

Image gallery_image(std::span<const Model* const> models,
                    std::span<const ImageInstance> instances,
                    MaskStrategy strategy, double ratio, std::uint64_t eval_seed) {
  if (models.empty() || instances.empty())
    throw Error("gallery: need at least one model and one instance");
  const PatchGrid& grid = models.front()->grid();
  for (const Model* m : models) {
    if (!(m->grid() == grid)) throw Error("gallery: models disagree on geometry");
  }
  const std::size_t th = grid.height, tw = grid.width;
  const std::size_t cols = models.size() + 2;
  Image out(th * instances.size(), tw * cols);
  auto blit = [&](const Image& tile, std::size_t row, std::size_t col) {
    for (std::size_t r = 0; r < th; ++r)
      for (std::size_t c = 0; c < tw; ++c)
        for (std::size_t ch = 0; ch < 3; ++ch)
          out.at(row * th + r, col * tw + c, ch) = tile.at(r, c, ch);
  };
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Image& truth = instances[i].pixels;
    if (truth.height != th || truth.width != tw)
      throw Error("gallery: instance " + instances[i].id + " does not match the model grid");
    const PatchMask mask =
        make_mask(grid, strategy, ratio, eval_mask_seed(eval_seed, instances[i].id));
    blit(apply_mask(truth, mask).masked_image, i, 0);
    for (std::size_t m = 0; m < models.size(); ++m)
      blit(paste_visible(models[m]->reconstruct(truth, mask), truth, mask), i, m + 1);
    blit(truth, i, cols - 1);
  }
  return out;
}

void emit_gallery(const std::filesystem::path& path,
                  std::span<const Model* const> models,
                  std::span<const ImageInstance> instances,
                  MaskStrategy strategy, double ratio, std::uint64_t eval_seed) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_image(path, gallery_image(models, instances, strategy, ratio, eval_seed));
}

}  // namespace minr
