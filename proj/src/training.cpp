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

#include "minr/training.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <unordered_map>

#include "minr/error.hpp"
#include "minr/model.hpp"
#include "minr/rng.hpp"

namespace minr {
namespace {

constexpr char kMagic[8] = {'M', 'I', 'N', 'R', 'C', 'K', 'P', 'T'};
constexpr std::uint64_t kOrderSalt = 0x6f72646572ULL;  // "order"

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw Error("checkpoint: truncated file");
  }
  template <typename T>
  T le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(in_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace

ad::Tensor instance_loss(const ad::Tensor& pred, const ad::Tensor& target) {
  if (pred.shape() != target.shape() || pred.rank() != 2 || pred.dim(1) != 3) {
    throw ShapeError("instance_loss: shape mismatch " +
                     ad::shape_string(pred.shape()) + " vs " +
                     ad::shape_string(target.shape()));
  }
  return ad::scale(ad::mse(pred, target), 3.0);
}

ad::Tensor batch_loss(const Model& model, std::span<const Image* const> batch,
                      std::span<const PatchMask> masks) {
  if (batch.empty()) throw Error("batch_loss: empty batch");
  if (batch.size() != masks.size())
    throw Error("batch_loss: one mask per instance required");
  ad::Tensor total;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const ad::Tensor l = model.objective(*batch[i], masks[i]);
    total = total.defined() ? ad::add(total, l) : l;
  }
  return ad::scale(total, 1.0 / static_cast<double>(batch.size()));
}

void AdamState::resize_for(const nn::ParamList& params) {
  m.resize(params.size());
  v.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i].assign(params[i].tensor.size(), 0.0);
    v[i].assign(params[i].tensor.size(), 0.0);
  }
}

void adam_step(const nn::ParamList& params, AdamState& state,
               const AdamConfig& config, std::uint64_t step) {
  if (step < 1) throw Error("adam_step: step must be >= 1");
  if (state.m.size() != params.size()) state.resize_for(params);
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    ad::Tensor t = params[i].tensor;
    if (!t.has_grad()) {
      // A zero gradient still decays the moments.
      for (std::size_t j = 0; j < t.size(); ++j) {
        state.m[i][j] *= config.beta1;
        state.v[i][j] *= config.beta2;
      }
    } else {
      for (double g : t.mutable_grad()) {
        if (!std::isfinite(g))
          throw Error("adam_step: non-finite gradient in " + params[i].name);
      }
    }
    const std::vector<double> grad = t.grad_or_zeros();
    auto p = t.mutable_data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    const double decay = params[i].decay ? config.weight_decay : 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (t.has_grad()) {
        m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * grad[j];
        v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * grad[j] * grad[j];
      }
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] -= config.lr * (mhat / (std::sqrt(vhat) + config.eps) + decay * p[j]);
    }
  }
}

std::vector<std::uint8_t> Checkpoint::serialize() const {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.le<std::uint32_t>(version);
  w.le<std::uint64_t>(config_text.size());
  w.bytes(config_text.data(), config_text.size());
  w.le<std::uint64_t>(step);
  w.le<std::uint64_t>(tensors.size());
  for (const auto& t : tensors) {
    w.le<std::uint32_t>(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.le<std::uint32_t>(static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) w.le<std::uint64_t>(d);
    for (double v : t.values) w.f64(v);
  }
  return w.take();
}

Checkpoint Checkpoint::parse(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.str(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic)))
    throw Error("checkpoint: bad magic");
  Checkpoint c;
  c.version = r.le<std::uint32_t>();
  if (c.version != kVersion)
    throw Error("checkpoint: unsupported version " + std::to_string(c.version));
  c.config_text = r.str(r.le<std::uint64_t>());
  c.step = r.le<std::uint64_t>();
  const auto count = r.le<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedArray t;
    t.name = r.str(r.le<std::uint32_t>());
    const auto rank = r.le<std::uint32_t>();
    for (std::uint32_t k = 0; k < rank; ++k)
      t.shape.push_back(static_cast<std::size_t>(r.le<std::uint64_t>()));
    const std::size_t n = ad::num_elements(t.shape);
    r.need(n * 8);
    t.values.resize(n);
    for (double& v : t.values) v = r.f64();
    c.tensors.push_back(std::move(t));
  }
  if (!r.done()) throw Error("checkpoint: trailing bytes");
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  // Write-then-rename keeps the previous file intact if we die mid-write.
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse(bytes);
}

const NamedArray* Checkpoint::find(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

Config Checkpoint::config() const {
  Config c = Config::defaults();
  c.load_text(config_text, "<checkpoint>");
  return c;
}

Checkpoint capture(const Model& model, const AdamState& state,
                   const Config& config, std::uint64_t step) {
  Checkpoint c;
  c.config_text = config.to_text();
  c.step = step;
  const nn::ParamList params = model.parameters();
  for (const auto& p : params) {
    c.tensors.push_back({p.name, p.tensor.shape(),
                         {p.tensor.data().begin(), p.tensor.data().end()}});
  }
  if (state.m.size() == params.size()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      c.tensors.push_back({std::string(kMomentPrefixM) + params[i].name,
                           params[i].tensor.shape(), state.m[i]});
      c.tensors.push_back({std::string(kMomentPrefixV) + params[i].name,
                           params[i].tensor.shape(), state.v[i]});
    }
  }
  return c;
}

void restore(const Checkpoint& ckpt, const Model& model, AdamState* state) {
  const nn::ParamList params = model.parameters();
  std::unordered_map<std::string_view, const NamedArray*> index;
  for (const auto& t : ckpt.tensors) index[t.name] = &t;
  auto lookup = [&](const std::string& name,
                    const ad::Shape& shape) -> const NamedArray* {
    auto it = index.find(name);
    if (it == index.end()) return nullptr;
    if (it->second->shape != shape)
      throw Error("checkpoint: tensor " + name + " has shape " +
                  ad::shape_string(it->second->shape) + ", model expects " +
                  ad::shape_string(shape));
    return it->second;
  };
  if (state) state->resize_for(params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    ad::Tensor t = params[i].tensor;
    const NamedArray* a = lookup(params[i].name, t.shape());
    if (!a) throw Error("checkpoint: missing tensor " + params[i].name);
    std::copy(a->values.begin(), a->values.end(), t.mutable_data().begin());
    if (state) {
      if (const auto* m = lookup(std::string(kMomentPrefixM) + params[i].name, t.shape()))
        state->m[i] = m->values;
      if (const auto* v = lookup(std::string(kMomentPrefixV) + params[i].name, t.shape()))
        state->v[i] = v->values;
    }
  }
}

std::size_t sample_instance(std::uint64_t data_seed, std::size_t n,
                            std::uint64_t global_sample) {
  const std::uint64_t epoch = global_sample / n;
  const auto perm = seeded_permutation(n, mix_seed({data_seed, kOrderSalt, epoch}));
  return perm[global_sample % n];
}

AdamConfig adam_config(const Config& config) {
  AdamConfig a;
  a.lr = config.get_double("train.lr");
  a.beta1 = config.get_double("train.beta1");
  a.beta2 = config.get_double("train.beta2");
  a.eps = config.get_double("train.eps");
  a.weight_decay = config.get_double("train.weight_decay");
  if (!(a.lr > 0.0)) throw Error("train.lr must be positive");
  return a;
}

std::string format_loss_csv(std::uint64_t first_step,
                            std::span<const double> losses) {
  std::string out = "step,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%llu,%.17g\n",
                  static_cast<unsigned long long>(first_step + i), losses[i]);
    out += buf;
  }
  return out;
}

TrainResult train(const Config& config, const DatasetSplit& data,
                  const TrainOptions& options) {
  const auto steps = static_cast<std::uint64_t>(config.get_int("train.steps"));
  const auto batch = static_cast<std::size_t>(config.get_int("train.batch_size"));
  const auto every = config.get_int("train.checkpoint_every");
  if (batch < 1) throw Error("train.batch_size must be >= 1");
  if (data.train.empty()) throw Error("train: empty training split");
  const AdamConfig adam = adam_config(config);
  const std::uint64_t data_seed = config.get_seed("data.seed");
  const std::uint64_t mask_seed = config.get_seed("mask.seed");
  const bool fixed_masks = config.get_bool("mask.fixed");
  const MaskStrategy strategy = parse_strategy(config.get_string("mask.strategy"));
  const double ratio = config.get_double("mask.ratio");

  const auto model = make_model(config);
  const PatchGrid grid = model->grid();
  for (const auto& inst : data.train) {
    if (inst.pixels.height != grid.height || inst.pixels.width != grid.width)
      throw Error("train: instance " + inst.id + " does not match the model grid");
  }
  const nn::ParamList params = model->parameters();
  AdamState state;
  state.resize_for(params);
  std::uint64_t start = 0;
  if (options.resume) {
    restore(*options.resume, *model, &state);
    start = options.resume->step;
  }

  const bool write = !options.out_dir.empty();
  if (write) {
    std::filesystem::create_directories(options.out_dir);
    write_file(options.out_dir / "resolved.cfg", config.to_text());
  }
  std::filesystem::path last_good;

  TrainResult result;
  const std::size_t n = data.train.size();
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t s = start; s < steps; ++s) {
    std::vector<const Image*> images;
    std::vector<PatchMask> masks;
    for (std::size_t b = 0; b < batch; ++b) {
      const std::uint64_t g = s * batch + b;
      const std::size_t idx = sample_instance(data_seed, n, g);
      const std::uint64_t epoch = fixed_masks ? 0 : g / n;
      images.push_back(&data.train[idx].pixels);
      masks.push_back(make_mask(grid, strategy, ratio,
                                instance_mask_seed(mask_seed, idx, epoch)));
    }

    ad::Graph graph;
    double value = 0.0;
    {
      auto active = graph.activate();
      const ad::Tensor loss = batch_loss(*model, images, masks);
      value = loss.item();
      if (!std::isfinite(value)) {
        throw Error("train: non-finite loss at step " + std::to_string(s + 1) +
                    (last_good.empty() ? std::string()
                                       : "; last good checkpoint " +
                                             last_good.string()));
      }
      graph.backward(loss);
    }
    adam_step(params, state, adam, s + 1);
    for (const auto& p : params) p.tensor.node()->grad.clear();
    result.losses.push_back(value);

    if (options.log && options.log_every > 0 && (s + 1) % options.log_every == 0) {
      const double secs = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0).count();
      *options.log << "step " << (s + 1) << "/" << steps << " loss "
                   << std::setprecision(6) << value << " (" << std::fixed
                   << std::setprecision(1) << secs << "s)" << std::defaultfloat
                   << "\n" << std::flush;
    }
    if (write && every > 0 && (s + 1) % static_cast<std::uint64_t>(every) == 0) {
      last_good = options.out_dir / ("ckpt_" + std::to_string(s + 1) + ".bin");
      capture(*model, state, config, s + 1).save(last_good);
    }
  }

  result.final = capture(*model, state, config, std::max(steps, start));
  if (write) {
    result.final.save(options.out_dir / "checkpoint.bin");
    write_file(options.out_dir / "loss.csv",
               format_loss_csv(start + 1, result.losses));
  }
  return result;
}

}  // namespace minr
