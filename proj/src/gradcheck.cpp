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

#include "minr/gradcheck.hpp"

#include <chrono>
#include <cmath>
#include <functional>

#include "minr/data.hpp"
#include "minr/error.hpp"
#include "minr/rng.hpp"
#include "minr/training.hpp"

namespace minr {
namespace {

using ad::NamedTensor;
using ad::Tensor;

Tensor random_tensor(ad::Shape shape, SplitMix64& rng, bool requires_grad,
                     double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(ad::num_elements(shape));
  for (double& x : v) x = lo + (hi - lo) * rng.uniform();
  return Tensor::from(std::move(shape), std::move(v), requires_grad);
}

// Values in [0.2, 1] with random sign: keeps relu inputs away from the kink.
Tensor away_from_zero(ad::Shape shape, SplitMix64& rng) {
  std::vector<double> v(ad::num_elements(shape));
  for (double& x : v) {
    x = 0.2 + 0.8 * rng.uniform();
    if (rng.below(2)) x = -x;
  }
  return Tensor::from(std::move(shape), std::move(v), true);
}

// sum(f() * w) with w fixed, so every output element gets its own upstream
// gradient.
std::function<Tensor()> weighted(std::function<Tensor()> f, SplitMix64& rng) {
  const Tensor probe = f();
  const Tensor w = random_tensor(probe.shape(), rng, false);
  return [f = std::move(f), w] { return ad::sum(ad::mul(f(), w)); };
}

GradSuite timed(std::string name, const std::function<Tensor()>& builder,
                const std::vector<NamedTensor>& params, double tolerance) {
  const auto t0 = std::chrono::steady_clock::now();
  GradSuite s;
  s.name = std::move(name);
  s.report = ad::grad_check(builder, params, tolerance);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

}  // namespace

GradSuite op_suite(ad::OpKind kind, std::uint64_t seed, double tolerance) {
  using ad::OpKind;
  SplitMix64 rng(mix_seed({seed, static_cast<std::uint64_t>(kind)}));
  std::vector<NamedTensor> params;
  std::function<Tensor()> f;
  auto input = [&](std::string name, ad::Shape shape) {
    Tensor t = random_tensor(std::move(shape), rng, true);
    params.push_back({std::move(name), t});
    return t;
  };

  switch (kind) {
    case OpKind::matmul: {
      // Broadcast [2,3,4] x [4,5] and batched [2,3,4] x [2,4,3].
      const Tensor a = input("a", {2, 3, 4});
      const Tensor b = input("b", {4, 5});
      const Tensor c = input("c", {2, 4, 3});
      const auto f1 = weighted([=] { return ad::matmul(a, b); }, rng);
      const auto f2 = weighted([=] { return ad::matmul(a, c); }, rng);
      f = [=] { return ad::add(f1(), f2()); };
      break;
    }
    case OpKind::add: {
      const Tensor a = input("a", {2, 3, 4});
      const Tensor b = input("b", {4});
      const Tensor c = input("c", {2, 3, 4});
      f = weighted([=] { return ad::add(ad::add(a, b), c); }, rng);
      break;
    }
    case OpKind::mul: {
      const Tensor a = input("a", {3, 4});
      const Tensor b = input("b", {3, 4});
      // weighted() reduces through mul itself, which would hide a flipped rule.
      f = [=] { return ad::sum(ad::mul(a, b)); };
      break;
    }
    case OpKind::scale: {
      const Tensor a = input("a", {3, 4});
      f = weighted([=] { return ad::scale(a, -1.7); }, rng);
      break;
    }
    case OpKind::relu: {
      const Tensor a = away_from_zero({4, 5}, rng);
      params.push_back({"a", a});
      f = weighted([=] { return ad::relu(a); }, rng);
      break;
    }
    case OpKind::gelu: {
      const Tensor a = input("a", {4, 5});
      f = weighted([=] { return ad::gelu(ad::scale(a, 3.0)); }, rng);
      break;
    }
    case OpKind::sin: {
      const Tensor a = input("a", {4, 5});
      f = weighted([=] { return ad::sin(ad::scale(a, 3.0)); }, rng);
      break;
    }
    case OpKind::softmax_lastdim: {
      const Tensor a = input("a", {3, 5});
      f = weighted([=] { return ad::softmax_lastdim(ad::scale(a, 2.0)); }, rng);
      break;
    }
    case OpKind::layernorm_lastdim: {
      const Tensor x = input("x", {3, 6});
      const Tensor g = input("gamma", {6});
      const Tensor b = input("beta", {6});
      const auto f1 = weighted([=] { return ad::layernorm_lastdim(x, g, b); }, rng);
      const auto f2 = weighted([=] { return ad::layernorm_lastdim(x); }, rng);
      f = [=] { return ad::add(f1(), f2()); };
      break;
    }
    case OpKind::sum: {
      const Tensor a = input("a", {3, 4});
      f = [=] { return ad::scale(ad::sum(a), 1.3); };
      break;
    }
    case OpKind::mean: {
      const Tensor a = input("a", {3, 4});
      f = [=] { return ad::scale(ad::mean(a), 1.3); };
      break;
    }
    case OpKind::mse: {
      const Tensor p = input("pred", {3, 4});
      const Tensor t = input("target", {3, 4});
      f = [=] { return ad::mse(p, t); };
      break;
    }
    case OpKind::reshape: {
      const Tensor a = input("a", {2, 6});
      f = weighted([=] { return ad::reshape(a, {3, 4}); }, rng);
      break;
    }
    case OpKind::transpose_last2: {
      const Tensor a = input("a", {2, 3, 4});
      f = weighted([=] { return ad::transpose_last2(a); }, rng);
      break;
    }
    case OpKind::concat_lastdim: {
      const Tensor a = input("a", {3, 2});
      const Tensor b = input("b", {3, 4});
      f = weighted([=] {
        const Tensor parts[] = {a, b};
        return ad::concat_lastdim(parts);
      }, rng);
      break;
    }
    case OpKind::slice_lastdim: {
      const Tensor a = input("a", {3, 6});
      f = weighted([=] { return ad::slice_lastdim(a, 1, 4); }, rng);
      break;
    }
    case OpKind::embedding_lookup: {
      const Tensor table = input("table", {5, 3});
      const std::vector<std::size_t> idx{0, 2, 2, 4};
      f = weighted([=] { return ad::embedding_lookup(table, idx); }, rng);
      break;
    }
  }
  return timed("op:" + std::string(ad::op_name(kind)), f, params, tolerance);
}

GradSuite pipeline_suite(ModelMode mode, std::uint64_t seed, double tolerance) {
  const PatchGrid grid = PatchGrid::make(8, 8, 4);
  std::unique_ptr<Model> model;
  if (mode == ModelMode::mae) {
    MaeConfig c;
    c.grid = grid;
    c.d_model = 8;
    c.depth = 1;
    c.heads = 2;
    c.dec_dim = 8;
    c.dec_depth = 1;
    c.dec_heads = 2;
    model = std::make_unique<MaeModel>(c, seed);
  } else {
    HypernetConfig c;
    c.mode = mode == ModelMode::ginr ? HeadMode::ginr : HeadMode::transinr;
    c.grid = grid;
    c.d_model = 8;
    c.depth = 1;
    c.heads = 2;
    c.inr_width = 6;
    c.inr_layers = 3;
    c.features.num_frequencies = 1;
    // Perturbing a hypernet parameter by the difference step moves many INR
    // pre-activations at once, enough to cross relu kinks; sin keeps the
    // pipeline smooth. relu has its own op suite.
    c.activation = inr::Activation::sin;
    model = std::make_unique<MinrModel>(c, seed);
  }

  const Image a = synth_image(SynthKind::faces_like, 8, mix_seed({seed, 1}));
  const Image b = synth_image(SynthKind::scenes_like, 8, mix_seed({seed, 2}));
  const std::vector<const Image*> batch{&a, &b};
  const std::vector<PatchMask> masks{
      make_mask(grid, MaskStrategy::random, 0.5, mix_seed({seed, 3})),
      make_mask(grid, MaskStrategy::random, 0.5, mix_seed({seed, 4}))};

  std::vector<NamedTensor> params;
  for (const auto& p : model->parameters()) params.push_back({p.name, p.tensor});
  const Model* m = model.get();
  return timed("pipeline:" + std::string(mode_name(mode)),
               [&] { return batch_loss(*m, batch, masks); }, params, tolerance);
}

std::vector<GradSuite> run_all_suites(double tolerance) {
  std::vector<GradSuite> out;
  for (ad::OpKind k : ad::kAllOps) out.push_back(op_suite(k, 11, tolerance));
  for (ModelMode m : {ModelMode::transinr, ModelMode::ginr, ModelMode::mae})
    out.push_back(pipeline_suite(m, 12, tolerance));
  return out;
}

}  // namespace minr
