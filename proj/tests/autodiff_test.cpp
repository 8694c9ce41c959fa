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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "minr/autodiff.hpp"
#include "minr/error.hpp"
#include "minr/gradcheck.hpp"
#include "minr/rng.hpp"

namespace minr::ad {
namespace {

Tensor rand(Shape shape, std::uint64_t seed, bool grad = true) {
  SplitMix64 rng(seed);
  std::vector<double> v(num_elements(shape));
  for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
  return Tensor::from(std::move(shape), std::move(v), grad);
}

std::vector<double> backward_grad(const std::function<Tensor()>& f, const Tensor& x) {
  x.node()->grad.clear();
  Graph g;
  {
    auto active = g.activate();
    g.backward(f());
  }
  auto out = x.grad_or_zeros();
  x.node()->grad.clear();
  return out;
}

TEST(Autodiff, MatmulIdentity) {
  const Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
  const Tensor i = Tensor::from({2, 2}, {1, 0, 0, 1});
  const Tensor c = matmul(a, i);
  EXPECT_EQ(std::vector<double>(c.data().begin(), c.data().end()),
            (std::vector<double>{1, 2, 3, 4}));
}

TEST(Autodiff, MatmulMatchesNaiveLoops) {
  const Tensor a = rand({2, 3, 4}, 1, false);
  const Tensor b = rand({4, 5}, 2, false);
  const Tensor c = matmul(a, b);
  ASSERT_EQ(c.shape(), (Shape{2, 3, 5}));
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 5; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 4; ++k) s += a[n * 12 + i * 4 + k] * b[k * 5 + j];
        EXPECT_NEAR(c[n * 15 + i * 5 + j], s, 1e-12);
      }
}

TEST(Autodiff, SoftmaxOfZerosIsUniform) {
  const Tensor s = softmax_lastdim(Tensor::from({3}, {0, 0, 0}));
  for (double v : s.data()) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(Autodiff, MseOfEqualIsZero) {
  EXPECT_EQ(mse(Tensor::from({2}, {1, 2}), Tensor::from({2}, {1, 2})).item(), 0.0);
}

TEST(Autodiff, SoftmaxRowsSumToOne) {
  const Tensor s = softmax_lastdim(scale(rand({7, 9}, 3, false), 10.0));
  for (std::size_t r = 0; r < 7; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 9; ++c) sum += s[r * 9 + c];
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Autodiff, LayernormRowsHaveZeroMean) {
  const Tensor y = layernorm_lastdim(add(scale(rand({5, 16}, 4, false), 3.0),
                                         Tensor::full({16}, 7.0)));
  for (std::size_t r = 0; r < 5; ++r) {
    double mu = 0.0;
    for (std::size_t c = 0; c < 16; ++c) mu += y[r * 16 + c];
    EXPECT_LT(std::abs(mu / 16.0), 1e-9);
  }
}

TEST(Autodiff, GeluUsesTanhApproximation) {
  const std::vector<double> xs{-3.0, -0.5, 0.0, 0.7, 2.5};
  const Tensor y = gelu(Tensor::from({xs.size()}, xs));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double want =
        0.5 * x * (1.0 + std::tanh(std::sqrt(2.0 / M_PI) * (x + 0.044715 * x * x * x)));
    EXPECT_NEAR(y[i], want, 1e-15);
  }
}

TEST(Autodiff, MseGradientClosedForm) {
  // loss = mse(w x, y), w = 1, x = 2, y = 0 -> d/dw (2w)^2 = 8.
  const Tensor w = Tensor::from({1}, {1.0}, true);
  const Tensor x = Tensor::from({1}, {2.0});
  const Tensor y = Tensor::from({1}, {0.0});
  const auto g = backward_grad([&] { return mse(mul(w, x), y); }, w);
  EXPECT_DOUBLE_EQ(g[0], 8.0);
}

TEST(Autodiff, SinGradientAtZeroIsOne) {
  const Tensor x = Tensor::from({1}, {0.0}, true);
  EXPECT_DOUBLE_EQ(backward_grad([&] { return sum(ad::sin(x)); }, x)[0], 1.0);
}

TEST(Autodiff, FanOutAccumulatesBranchGradients) {
  const Tensor x = rand({3, 4}, 5);
  const Tensor w1 = rand({3, 4}, 6, false);
  const Tensor w2 = rand({3, 4}, 7, false);
  auto b1 = [&] { return sum(mul(ad::sin(x), w1)); };
  auto b2 = [&] { return sum(mul(gelu(x), w2)); };
  const auto g1 = backward_grad(b1, x);
  const auto g2 = backward_grad(b2, x);
  const auto both = backward_grad([&] { return add(b1(), b2()); }, x);
  for (std::size_t i = 0; i < both.size(); ++i) EXPECT_NEAR(both[i], g1[i] + g2[i], 1e-14);
}

TEST(Autodiff, SixOpRandomGraphPassesFiniteDifferences) {
  const Tensor a = rand({3, 4}, 8);
  const Tensor b = rand({4, 5}, 9);
  const Tensor t = rand({3, 5}, 10, false);
  const std::vector<NamedTensor> params{{"a", a}, {"b", b}};
  const auto report = grad_check(
      [&] {
        const Tensor h = layernorm_lastdim(gelu(matmul(a, b)));
        return mse(softmax_lastdim(add(h, ad::sin(h))), t);
      },
      params, 1e-4);
  EXPECT_TRUE(report.passed) << report.max_rel_error;
}

TEST(Autodiff, MatmulMseGradCheckPasses) {
  const Tensor a = rand({4, 3}, 11);
  const Tensor b = rand({3, 2}, 12);
  const Tensor t = rand({4, 2}, 13, false);
  const std::vector<NamedTensor> params{{"a", a}, {"b", b}};
  EXPECT_TRUE(grad_check([&] { return mse(matmul(a, b), t); }, params, 1e-4).passed);
}

class OpGradCheck : public ::testing::TestWithParam<OpKind> {};

TEST_P(OpGradCheck, MatchesFiniteDifferences) {
  for (std::uint64_t seed : {11u, 21u, 31u}) {
    const GradSuite s = op_suite(GetParam(), seed);
    EXPECT_TRUE(s.report.passed) << s.name << " seed " << seed << ": "
                                 << s.report.max_rel_error;
  }
}

TEST_P(OpGradCheck, CorruptedRuleIsCaught) {
  testing::ScopedRuleCorruption corrupt(GetParam());
  const GradSuite s = op_suite(GetParam());
  EXPECT_FALSE(s.report.passed) << s.name;
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradCheck, ::testing::ValuesIn(kAllOps),
                         [](const auto& info) { return std::string(op_name(info.param)); });

TEST(Autodiff, BackwardTwiceWithoutResetThrows) {
  const Tensor x = rand({2}, 14);
  Graph g;
  Tensor loss;
  {
    auto active = g.activate();
    loss = sum(mul(x, x));
  }
  g.backward(loss);
  EXPECT_THROW(g.backward(loss), Error);
  g.reset();
  {
    auto active = g.activate();
    loss = sum(mul(x, x));
  }
  EXPECT_NO_THROW(g.backward(loss));
}

TEST(Autodiff, NonScalarLossThrows) {
  const Tensor x = rand({2, 2}, 15);
  Graph g;
  Tensor y;
  {
    auto active = g.activate();
    y = relu(x);
  }
  EXPECT_THROW(g.backward(y), Error);
}

TEST(Autodiff, RecordsOnlyWhenActiveAndRequired) {
  const Tensor x = rand({2}, 16);
  const Tensor c = rand({2}, 17, false);
  Graph g;
  (void)relu(x);  // no active graph
  EXPECT_EQ(g.size(), 0u);
  {
    auto active = g.activate();
    (void)relu(c);  // no input requires grad
    EXPECT_EQ(g.size(), 0u);
    (void)relu(x);
    EXPECT_EQ(g.size(), 1u);
  }
}

TEST(Autodiff, TapeIsTopologicalWithUniqueIds) {
  const Tensor a = rand({3, 4}, 18);
  const Tensor b = rand({4, 2}, 19);
  Graph g;
  auto active = g.activate();
  const Tensor h = relu(matmul(a, b));
  (void)sum(add(h, gelu(h)));
  std::set<std::uint64_t> seen{a.id(), b.id()};
  std::set<std::uint64_t> outputs;
  for (const auto& op : g.ops()) {
    for (const auto& in : op.inputs) EXPECT_TRUE(seen.count(in->id)) << op_name(op.kind);
    EXPECT_TRUE(outputs.insert(op.output->id).second);
    seen.insert(op.output->id);
  }
}

TEST(Autodiff, ShapeErrorNamesOpAndShapes) {
  try {
    (void)matmul(rand({2, 3}, 20, false), rand({2, 3}, 21, false));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("matmul"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[2,3]"), std::string::npos) << msg;
  }
}

TEST(Autodiff, AddBroadcastsOnlyOverLeadingAxes) {
  EXPECT_NO_THROW((void)add(rand({2, 3, 4}, 22, false), rand({3, 4}, 23, false)));
  EXPECT_THROW((void)add(rand({2, 3, 4}, 22, false), rand({2, 1, 4}, 23, false)),
               ShapeError);
  EXPECT_THROW((void)mul(rand({3, 4}, 22, false), rand({4}, 23, false)), ShapeError);
}

TEST(Autodiff, DebugChecksRejectNonFiniteInputs) {
  const Tensor bad = Tensor::from({2}, {1.0, std::numeric_limits<double>::quiet_NaN()});
  EXPECT_NO_THROW((void)relu(bad));
  set_debug_checks(true);
  EXPECT_THROW((void)relu(bad), Error);
  set_debug_checks(false);
}

TEST(Autodiff, EmbeddingLookupScatterAddsRepeatedRows) {
  const Tensor table = rand({4, 2}, 24);
  const std::vector<std::size_t> idx{1, 1, 3};
  const auto g = backward_grad([&] { return sum(embedding_lookup(table, idx)); }, table);
  EXPECT_EQ(g, (std::vector<double>{0, 0, 2, 2, 0, 0, 1, 1}));
  const std::vector<std::size_t> oob{4};
  EXPECT_THROW((void)embedding_lookup(table, oob), Error);
}

}  // namespace
}  // namespace minr::ad
