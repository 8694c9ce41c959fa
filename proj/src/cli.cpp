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

#include "minr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>

#include "minr/config.hpp"
#include "minr/data.hpp"
#include "minr/error.hpp"
#include "minr/eval.hpp"
#include "minr/gradcheck.hpp"
#include "minr/model.hpp"
#include "minr/training.hpp"

namespace minr::cli {
namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::size_t threads = 1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "config file (section.key = value)");
  app->add_option("--set", c.overrides, "override, section.key=value")
      ->allow_extra_args(false);
  app->add_option("--threads", c.threads, "worker cap; 1 is the reference mode")
      ->check(CLI::PositiveNumber);
}

Config resolve(const Common& c) {
  Config config = Config::defaults();
  if (!c.config_path.empty()) config.load_file(c.config_path);
  for (const auto& o : c.overrides) config.apply_override(o);
  return config;
}

void apply_overrides(Config& config, const Common& c) {
  for (const auto& o : c.overrides) config.apply_override(o);
}

struct Loaded {
  Config config;
  std::unique_ptr<Model> model;
};

// Model geometry comes from the checkpoint; --set may adjust eval and mask
// keys on top of it.
Loaded load_checkpoint(const std::string& path, const Common& c) {
  const Checkpoint ckpt = Checkpoint::load(path);
  Loaded l{ckpt.config(), nullptr};
  apply_overrides(l.config, c);
  l.model = make_model(l.config);
  restore(ckpt, *l.model, nullptr);
  return l;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

// An instance either from the checkpoint's data source by id or from a file,
// brought to the model grid.
ImageInstance pick_instance(const Config& config, const std::string& id,
                            const std::string& image_path) {
  if (!image_path.empty()) {
    const auto size = static_cast<std::size_t>(config.get_int("data.size"));
    Image img = resize_bilinear(center_crop_square(read_image(image_path)), size, size);
    return {std::filesystem::path(image_path).stem().string(), std::move(img), "file"};
  }
  const std::string& source = config.get_string("data.source");
  const DatasetSplit split = load_source(source, config);
  const ImageInstance* inst = split.find(id);
  if (!inst) throw Error("no instance '" + id + "' in " + source);
  return *inst;
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& s) {
  const auto x = s.find('x');
  std::size_t h = 0, w = 0;
  if (x == std::string::npos || std::sscanf(s.c_str(), "%zux%zu", &h, &w) != 2 ||
      h == 0 || w == 0)
    throw Error("--size must be HxW, got '" + s + "'");
  return {h, w};
}

std::vector<MaskStrategy> strategies_of(const Config& config) {
  std::vector<MaskStrategy> out;
  for (const auto& s : config.get_list("eval.strategies")) out.push_back(parse_strategy(s));
  return out;
}

std::vector<double> ratios_of(const Config& config) {
  std::vector<double> out;
  for (const auto& s : config.get_list("eval.ratios")) {
    Config probe = Config::defaults();
    probe.set("mask.ratio", s);
    out.push_back(probe.get_double("mask.ratio"));
  }
  return out;
}

void log_seeds(const Config& config, std::ostream& out) {
  out << "seeds: data=" << config.get_seed("data.seed")
      << " mask=" << config.get_seed("mask.seed")
      << " init=" << config.get_seed("train.seed") << "\n";
}

int cmd_train(const Common& c, const std::string& out_dir,
              const std::string& resume, std::size_t log_every, std::ostream& out) {
  const Config config = resolve(c);
  out << "# resolved config\n" << config.to_text();
  log_seeds(config, out);
  const DatasetSplit data = load_source(config.get_string("data.source"), config);
  out << "data: " << data.domain << " train=" << data.train.size()
      << " test=" << data.test.size() << "\n";
  TrainOptions opts;
  opts.out_dir = out_dir;
  opts.log = &out;
  opts.log_every = log_every;
  if (!resume.empty()) opts.resume = Checkpoint::load(resume);
  const TrainResult r = train(config, data, opts);
  out << "wrote " << (std::filesystem::path(out_dir) / "checkpoint.bin").string()
      << " at step " << r.final.step << "\n";
  return kExitOk;
}

int cmd_eval(const Common& c, const std::vector<std::string>& ckpts,
             const std::vector<std::string>& sources, const std::string& out_path,
             const std::string& gallery, std::size_t gallery_count,
             std::ostream& out) {
  std::vector<Loaded> loaded;
  for (const auto& p : ckpts) loaded.push_back(load_checkpoint(p, c));
  const Config& ref = loaded.front().config;

  std::vector<std::string> test_sources = sources;
  if (test_sources.empty()) test_sources.push_back(ref.get_string("data.source"));
  std::vector<DatasetSplit> splits;
  for (const auto& s : test_sources) {
    Config cfg = ref;
    cfg.set("data.source", s);
    splits.push_back(load_source(s, cfg));
  }
  std::vector<TestSet> tests;
  for (const auto& s : splits) tests.push_back({s.domain, s.test});

  std::vector<EvalModel> models;
  std::set<std::string> names;
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    std::string name(mode_name(loaded[i].model->mode()));
    if (!names.insert(name).second) name += "-" + std::to_string(i);
    names.insert(name);
    models.push_back({loaded[i].model.get(), name,
                      source_domain(loaded[i].config.get_string("data.source"))});
  }

  EvalOptions opts;
  opts.strategies = strategies_of(ref);
  opts.ratios = ratios_of(ref);
  opts.seed = ref.get_seed("eval.seed");
  opts.threads = c.threads;
  const EvalReport report = evaluate(models, tests, opts);
  if (out_path.empty()) {
    out << report.to_csv();
  } else {
    write_text(out_path, report.to_csv());
    out << "wrote " << out_path << " (" << report.rows.size() << " rows)\n";
  }
  if (!gallery.empty()) {
    std::vector<const Model*> ms;
    for (const auto& l : loaded) ms.push_back(l.model.get());
    const auto n = std::min(gallery_count, tests.front().instances.size());
    emit_gallery(gallery, ms, tests.front().instances.first(n),
                 opts.strategies.front(), opts.ratios.front(), opts.seed);
    out << "wrote " << gallery << "\n";
  }
  return kExitOk;
}

int cmd_reconstruct(const Common& c, const std::string& ckpt, const std::string& id,
                    const std::string& image, const std::string& out_dir,
                    std::ostream& out) {
  const Loaded l = load_checkpoint(ckpt, c);
  const ImageInstance inst = pick_instance(l.config, id, image);
  const PatchMask mask = make_mask(
      l.model->grid(), parse_strategy(l.config.get_string("mask.strategy")),
      l.config.get_double("mask.ratio"),
      eval_mask_seed(l.config.get_seed("eval.seed"), inst.id));
  const Image raw = l.model->reconstruct(inst.pixels, mask);
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  write_image(dir / "masked.png", apply_mask(inst.pixels, mask).masked_image);
  write_image(dir / "reconstruction.png", raw);
  write_image(dir / "pasted.png", paste_visible(raw, inst.pixels, mask));
  write_image(dir / "truth.png", inst.pixels);
  out << inst.id << ": psnr_full=" << format_psnr(psnr(raw, inst.pixels))
      << " psnr_masked=" << format_psnr(psnr(raw, inst.pixels, pixel_mask(mask)))
      << "\nwrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_render(const Common& c, const std::string& ckpt, const std::string& id,
               const std::string& image, const std::string& size,
               const std::string& out_path, std::ostream& out) {
  const Loaded l = load_checkpoint(ckpt, c);
  const auto* minr = dynamic_cast<const MinrModel*>(l.model.get());
  if (!minr) throw Error("render needs a transinr or ginr checkpoint");
  const auto [h, w] = parse_size(size);
  const ImageInstance inst = pick_instance(l.config, id, image);
  const PatchMask mask = make_mask(
      minr->grid(), parse_strategy(l.config.get_string("mask.strategy")),
      l.config.get_double("mask.ratio"),
      eval_mask_seed(l.config.get_seed("eval.seed"), inst.id));
  const Image img = inr::render(minr->predict(inst.pixels, mask), h, w);
  std::filesystem::path p(out_path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  write_image(p, img);
  out << "wrote " << out_path << " (" << h << "x" << w << ")\n";
  return kExitOk;
}

int cmd_gradcheck(std::ostream& out) {
  bool ok = true;
  double total = 0.0;
  char line[160];
  for (const auto& s : run_all_suites()) {
    std::snprintf(line, sizeof(line), "%-28s max_rel_err=%.3e  %6.2fs  %s\n",
                  s.name.c_str(), s.report.max_rel_error, s.seconds,
                  s.report.passed ? "PASS" : "FAIL");
    out << line;
    ok = ok && s.report.passed;
    total += s.seconds;
  }
  std::snprintf(line, sizeof(line), "total %.2fs, tolerance %.0e: %s\n", total,
                kGradTolerance, ok ? "PASS" : "FAIL");
  out << line;
  return ok ? kExitOk : kExitFailure;
}

int cmd_gallery(const Common& c, const std::vector<std::string>& ckpts,
                const std::string& source, std::size_t count,
                const std::string& out_path, std::ostream& out) {
  std::vector<Loaded> loaded;
  for (const auto& p : ckpts) loaded.push_back(load_checkpoint(p, c));
  Config cfg = loaded.front().config;
  if (!source.empty()) cfg.set("data.source", source);
  const DatasetSplit split = load_source(cfg.get_string("data.source"), cfg);
  std::vector<const Model*> ms;
  for (const auto& l : loaded) ms.push_back(l.model.get());
  const std::span<const ImageInstance> insts(split.test);
  emit_gallery(out_path, ms, insts.first(std::min(count, insts.size())),
               parse_strategy(cfg.get_string("mask.strategy")),
               cfg.get_double("mask.ratio"), cfg.get_seed("eval.seed"));
  out << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Masked implicit neural representations at desk scale", "minr"};
  app.require_subcommand(1);
  Common common;

  std::string out_dir, resume, ckpt, id, image, size = "128x128", out_path, gallery,
      source;
  std::vector<std::string> ckpts, sources;
  std::size_t log_every = 100, count = 4;

  auto* train = app.add_subcommand("train", "train a model");
  add_common(train, common);
  train->add_option("--out", out_dir, "output directory")->required();
  train->add_option("--resume", resume, "checkpoint to continue from");
  train->add_option("--log-every", log_every, "progress line period (0: off)");

  auto* eval = app.add_subcommand("eval", "PSNR report over test splits");
  add_common(eval, common);
  eval->add_option("--ckpt", ckpts, "checkpoint (repeatable)")->required();
  eval->add_option("--test", sources, "test source (repeatable); default: train source");
  eval->add_option("--out", out_path, "report CSV (default: stdout)");
  eval->add_option("--gallery", gallery, "also write a gallery PNG");
  eval->add_option("--gallery-count", count, "gallery rows");

  auto* recon = app.add_subcommand("reconstruct", "masked reconstruction of one image");
  add_common(recon, common);
  recon->add_option("--ckpt", ckpt)->required();
  auto* rid = recon->add_option("--id", id, "instance id in the data source");
  recon->add_option("--image", image, "image file instead of --id")->excludes(rid);
  recon->add_option("--out", out_dir, "output directory")->required();

  auto* render = app.add_subcommand("render", "render a predicted INR at any size");
  add_common(render, common);
  render->add_option("--ckpt", ckpt)->required();
  auto* did = render->add_option("--id", id, "instance id in the data source");
  render->add_option("--image", image, "image file instead of --id")->excludes(did);
  render->add_option("--size", size, "HxW");
  render->add_option("--out", out_path, "output PNG")->required();

  auto* grad = app.add_subcommand("gradcheck", "finite-difference gradient suites");
  add_common(grad, common);

  auto* gal = app.add_subcommand("gallery", "masked | reconstructions | truth grid");
  add_common(gal, common);
  gal->add_option("--ckpt", ckpts, "checkpoint (repeatable)")->required();
  gal->add_option("--source", source, "data source (default: checkpoint's)");
  gal->add_option("--count", count, "rows");
  gal->add_option("--out", out_path, "output PNG")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*train) return cmd_train(common, out_dir, resume, log_every, out);
    if (*eval) return cmd_eval(common, ckpts, sources, out_path, gallery, count, out);
    if (*recon) {
      if (id.empty() && image.empty()) throw Error("reconstruct needs --id or --image");
      return cmd_reconstruct(common, ckpt, id, image, out_dir, out);
    }
    if (*render) {
      if (id.empty() && image.empty()) throw Error("render needs --id or --image");
      return cmd_render(common, ckpt, id, image, size, out_path, out);
    }
    if (*grad) return cmd_gradcheck(out);
    if (*gal) return cmd_gallery(common, ckpts, source, count, out_path, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace minr::cli
