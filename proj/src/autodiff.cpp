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

#include "minr/autodiff.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

namespace minr::ad {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

std::atomic<std::uint64_t> g_next_id{1};
thread_local Graph* g_active = nullptr;
thread_local bool g_debug_checks = false;
thread_local int g_corrupted_rule = -1;

std::shared_ptr<Node> new_node(Shape shape, std::vector<double> data,
                               bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  node->requires_grad = requires_grad;
  return node;
}

[[noreturn]] void shape_fail(OpKind kind, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op_name(kind)) + ": shape mismatch " +
                   shape_string(a) + " vs " + shape_string(b));
}

[[noreturn]] void shape_fail(OpKind kind, const Shape& a,
                             const std::string& why) {
  throw ShapeError(std::string(op_name(kind)) + ": invalid shape " +
                   shape_string(a) + " (" + why + ")");
}

std::vector<double>& ensure_grad(Node& node) {
  if (node.grad.empty()) node.grad.assign(node.data.size(), 0.0);
  return node.grad;
}

std::size_t last_dim(const Shape& s) { return s.empty() ? 1 : s.back(); }

std::size_t leading_count(const Shape& s, std::size_t trailing) {
  std::size_t n = 1;
  for (std::size_t i = 0; i + trailing < s.size(); ++i) n *= s[i];
  return n;
}

void check_arity(OpKind kind, std::span<const Tensor> inputs,
                 std::size_t lo, std::size_t hi) {
  if (inputs.size() < lo || inputs.size() > hi) {
    throw ShapeError(std::string(op_name(kind)) + ": expected " +
                     std::to_string(lo) + (lo == hi ? "" : "+") +
                     " inputs, got " + std::to_string(inputs.size()));
  }
  for (const auto& t : inputs) {
    if (!t.defined()) {
      throw ShapeError(std::string(op_name(kind)) + ": undefined input");
    }
  }
}

struct MatmulDims {
  std::size_t batch, m, k, n;
  bool broadcast_b;
};

MatmulDims matmul_dims(const Shape& a, const Shape& b) {
  if (a.size() < 2 || b.size() < 2) shape_fail(OpKind::matmul, a, b);
  MatmulDims d{};
  d.m = a[a.size() - 2];
  d.k = a[a.size() - 1];
  d.n = b[b.size() - 1];
  if (b[b.size() - 2] != d.k) shape_fail(OpKind::matmul, a, b);
  d.batch = leading_count(a, 2);
  if (b.size() == 2) {
    d.broadcast_b = true;
  } else {
    if (b.size() != a.size() ||
        !std::equal(a.begin(), a.end() - 2, b.begin())) {
      shape_fail(OpKind::matmul, a, b);
    }
    d.broadcast_b = false;
  }
  return d;
}

// Forward kernels. Each returns the output node data (shape computed by the
// caller) and may stash values needed by the backward rule in `saved`.

double gelu_value(double x) {
  const double u = kGeluScale * (x + kGeluCoeff * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_derivative(double x) {
  const double u = kGeluScale * (x + kGeluCoeff * x * x * x);
  const double t = std::tanh(u);
  const double du = kGeluScale * (1.0 + 3.0 * kGeluCoeff * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

void check_finite(OpKind kind, std::span<const Tensor> inputs) {
  for (const auto& t : inputs) {
    for (double v : t.data()) {
      if (!std::isfinite(v)) {
        throw Error(std::string(op_name(kind)) + ": non-finite input in " +
                    shape_string(t.shape()) + " tensor");
      }
    }
  }
}

void backward_rule(const OpRecord& r, double sgn);

}  // namespace

std::size_t num_elements(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::mul: return "mul";
    case OpKind::scale: return "scale";
    case OpKind::relu: return "relu";
    case OpKind::gelu: return "gelu";
    case OpKind::sin: return "sin";
    case OpKind::softmax_lastdim: return "softmax_lastdim";
    case OpKind::layernorm_lastdim: return "layernorm_lastdim";
    case OpKind::sum: return "sum";
    case OpKind::mean: return "mean";
    case OpKind::mse: return "mse";
    case OpKind::reshape: return "reshape";
    case OpKind::transpose_last2: return "transpose_last2";
    case OpKind::concat_lastdim: return "concat_lastdim";
    case OpKind::slice_lastdim: return "slice_lastdim";
    case OpKind::embedding_lookup: return "embedding_lookup";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Tensor

Tensor make_tensor(std::shared_ptr<Node> node) { return Tensor(std::move(node)); }

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = num_elements(shape);
  return Tensor(new_node(std::move(shape), std::vector<double>(n, value),
                         requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values,
                    bool requires_grad) {
  if (num_elements(shape) != values.size()) {
    throw ShapeError("Tensor::from: shape " + shape_string(shape) +
                     " does not hold " + std::to_string(values.size()) +
                     " values");
  }
  return Tensor(new_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value) { return from({}, {value}); }

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item: tensor " + shape_string(shape()) +
                     " is not a scalar");
  }
  return node_->data[0];
}

std::span<double> Tensor::mutable_grad() { return ensure_grad(*node_); }

std::vector<double> Tensor::grad_or_zeros() const {
  if (node_->grad.empty()) return std::vector<double>(node_->data.size(), 0.0);
  return node_->grad;
}

Tensor Tensor::detach() const {
  return Tensor(new_node(node_->shape, node_->data, false));
}

// ---------------------------------------------------------------------------
// Graph

Graph::~Graph() {
  if (g_active == this) g_active = nullptr;
}

Graph::Activation::Activation(Graph& graph) : previous_(g_active) {
  g_active = &graph;
}

Graph::Activation::~Activation() { g_active = previous_; }

Graph* Graph::active() { return g_active; }

void Graph::record(OpRecord record) {
  if (consumed_) {
    throw Error("graph: recording after backward requires reset()");
  }
  ops_.push_back(std::move(record));
}

void Graph::reset() {
  ops_.clear();
  consumed_ = false;
}

void Graph::backward(const Tensor& loss) {
  if (consumed_) throw Error("backward: graph already consumed; call reset()");
  if (!loss.defined() || loss.size() != 1 || loss.rank() > 1) {
    throw ShapeError("backward: loss must be a scalar, got " +
                     (loss.defined() ? shape_string(loss.shape()) : "undefined"));
  }
  ensure_grad(*loss.node())[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    if (it->output->grad.empty()) continue;
    const double sgn =
        static_cast<int>(it->kind) == g_corrupted_rule ? -1.0 : 1.0;
    backward_rule(*it, sgn);
  }
  // Interior nodes keep their gradients only as long as a caller holds them.
  ops_.clear();
  consumed_ = true;
}

void set_debug_checks(bool enabled) { g_debug_checks = enabled; }
bool debug_checks() { return g_debug_checks; }

namespace testing {

ScopedRuleCorruption::ScopedRuleCorruption(OpKind kind)
    : previous_(g_corrupted_rule) {
  g_corrupted_rule = static_cast<int>(kind);
}

ScopedRuleCorruption::~ScopedRuleCorruption() { g_corrupted_rule = previous_; }

}  // namespace testing

// ---------------------------------------------------------------------------
// Forward

Tensor apply(OpKind kind, std::span<const Tensor> inputs,
             const OpAttrs& attrs) {
  switch (kind) {
    case OpKind::matmul:
    case OpKind::add:
    case OpKind::mul:
    case OpKind::mse:
      check_arity(kind, inputs, 2, 2);
      break;
    case OpKind::layernorm_lastdim:
      check_arity(kind, inputs, 1, 3);
      if (inputs.size() == 2) check_arity(kind, inputs, 3, 3);
      break;
    case OpKind::concat_lastdim:
      check_arity(kind, inputs, 1, static_cast<std::size_t>(-1));
      break;
    default:
      check_arity(kind, inputs, 1, 1);
  }
  if (g_debug_checks) check_finite(kind, inputs);

  const Tensor& a = inputs[0];
  const Shape& sa = a.shape();
  Shape out_shape;
  std::vector<double> out;
  std::vector<double> saved;

  switch (kind) {
    case OpKind::matmul: {
      const Tensor& b = inputs[1];
      const MatmulDims d = matmul_dims(sa, b.shape());
      out_shape = sa;
      out_shape.back() = d.n;
      out.assign(d.batch * d.m * d.n, 0.0);
      for (std::size_t i = 0; i < d.batch; ++i) {
        ConstMap am(a.data().data() + i * d.m * d.k, d.m, d.k);
        ConstMap bm(b.data().data() + (d.broadcast_b ? 0 : i * d.k * d.n),
                    d.k, d.n);
        MutMap cm(out.data() + i * d.m * d.n, d.m, d.n);
        cm.noalias() = am * bm;
      }
      break;
    }
    case OpKind::add: {
      const Shape& sb = inputs[1].shape();
      if (sb.size() > sa.size() ||
          !std::equal(sb.begin(), sb.end(), sa.end() - sb.size())) {
        shape_fail(kind, sa, sb);
      }
      out_shape = sa;
      out.assign(a.data().begin(), a.data().end());
      const auto bd = inputs[1].data();
      const std::size_t nb = bd.size();
      for (std::size_t i = 0; i < out.size(); i += nb) {
        for (std::size_t j = 0; j < nb; ++j) out[i + j] += bd[j];
      }
      break;
    }
    case OpKind::mul: {
      if (inputs[1].shape() != sa) shape_fail(kind, sa, inputs[1].shape());
      out_shape = sa;
      out.resize(a.size());
      const auto ad = a.data();
      const auto bd = inputs[1].data();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
      break;
    }
    case OpKind::scale: {
      out_shape = sa;
      out.resize(a.size());
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = a.data()[i] * attrs.scalar;
      break;
    }
    case OpKind::relu: {
      out_shape = sa;
      out.resize(a.size());
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = a.data()[i] > 0.0 ? a.data()[i] : 0.0;
      break;
    }
    case OpKind::gelu: {
      out_shape = sa;
      out.resize(a.size());
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = gelu_value(a.data()[i]);
      break;
    }
    case OpKind::sin: {
      out_shape = sa;
      out.resize(a.size());
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::sin(a.data()[i]);
      break;
    }
    case OpKind::softmax_lastdim: {
      if (sa.empty()) shape_fail(kind, sa, "rank 0");
      out_shape = sa;
      out.resize(a.size());
      const std::size_t n = sa.back();
      for (std::size_t r = 0; r < a.size() / n; ++r) {
        const double* x = a.data().data() + r * n;
        double* y = out.data() + r * n;
        const double mx = *std::max_element(x, x + n);
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          y[j] = std::exp(x[j] - mx);
          z += y[j];
        }
        const double inv = 1.0 / z;
        for (std::size_t j = 0; j < n; ++j) y[j] *= inv;
      }
      break;
    }
    case OpKind::layernorm_lastdim: {
      if (sa.empty()) shape_fail(kind, sa, "rank 0");
      const std::size_t n = sa.back();
      const bool affine = inputs.size() == 3;
      if (affine) {
        if (inputs[1].shape() != Shape{n}) shape_fail(kind, sa, inputs[1].shape());
        if (inputs[2].shape() != Shape{n}) shape_fail(kind, sa, inputs[2].shape());
      }
      out_shape = sa;
      out.resize(a.size());
      const std::size_t rows = a.size() / n;
      // saved = [xhat (size), rstd (rows)]
      saved.resize(a.size() + rows);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* x = a.data().data() + r * n;
        double mu = 0.0;
        for (std::size_t j = 0; j < n; ++j) mu += x[j];
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) var += (x[j] - mu) * (x[j] - mu);
        var /= static_cast<double>(n);
        const double rstd = 1.0 / std::sqrt(var + attrs.eps);
        saved[a.size() + r] = rstd;
        for (std::size_t j = 0; j < n; ++j) {
          const double xh = (x[j] - mu) * rstd;
          saved[r * n + j] = xh;
          out[r * n + j] =
              affine ? xh * inputs[1].data()[j] + inputs[2].data()[j] : xh;
        }
      }
      break;
    }
    case OpKind::sum:
    case OpKind::mean: {
      double s = 0.0;
      for (double v : a.data()) s += v;
      if (kind == OpKind::mean) s /= static_cast<double>(a.size());
      out = {s};
      break;
    }
    case OpKind::mse: {
      if (inputs[1].shape() != sa) shape_fail(kind, sa, inputs[1].shape());
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double r = a.data()[i] - inputs[1].data()[i];
        s += r * r;
      }
      out = {s / static_cast<double>(a.size())};
      break;
    }
    case OpKind::reshape: {
      if (num_elements(attrs.shape) != a.size()) shape_fail(kind, sa, attrs.shape);
      out_shape = attrs.shape;
      out.assign(a.data().begin(), a.data().end());
      break;
    }
    case OpKind::transpose_last2: {
      if (sa.size() < 2) shape_fail(kind, sa, "rank < 2");
      const std::size_t m = sa[sa.size() - 2];
      const std::size_t n = sa[sa.size() - 1];
      out_shape = sa;
      std::swap(out_shape[sa.size() - 2], out_shape[sa.size() - 1]);
      out.resize(a.size());
      for (std::size_t b = 0; b < a.size() / (m * n); ++b) {
        ConstMap x(a.data().data() + b * m * n, m, n);
        MutMap y(out.data() + b * m * n, n, m);
        y = x.transpose();
      }
      break;
    }
    case OpKind::concat_lastdim: {
      if (sa.empty()) shape_fail(kind, sa, "rank 0");
      std::size_t total = 0;
      for (const auto& t : inputs) {
        const Shape& st = t.shape();
        if (st.size() != sa.size() ||
            !std::equal(sa.begin(), sa.end() - 1, st.begin())) {
          shape_fail(kind, sa, st);
        }
        total += st.back();
      }
      out_shape = sa;
      out_shape.back() = total;
      const std::size_t rows = a.size() / sa.back();
      out.resize(rows * total);
      std::size_t offset = 0;
      for (const auto& t : inputs) {
        const std::size_t w = t.shape().back();
        for (std::size_t r = 0; r < rows; ++r) {
          std::copy_n(t.data().data() + r * w, w,
                      out.data() + r * total + offset);
        }
        offset += w;
      }
      break;
    }
    case OpKind::slice_lastdim: {
      if (sa.empty() || attrs.begin >= attrs.end || attrs.end > sa.back()) {
        shape_fail(kind, sa,
                   "slice [" + std::to_string(attrs.begin) + "," +
                       std::to_string(attrs.end) + ")");
      }
      const std::size_t n = sa.back();
      const std::size_t w = attrs.end - attrs.begin;
      out_shape = sa;
      out_shape.back() = w;
      const std::size_t rows = a.size() / n;
      out.resize(rows * w);
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(a.data().data() + r * n + attrs.begin, w,
                    out.data() + r * w);
      }
      break;
    }
    case OpKind::embedding_lookup: {
      if (sa.size() != 2) shape_fail(kind, sa, "table must be rank 2");
      const std::size_t d = sa[1];
      out_shape = {attrs.indices.size(), d};
      out.resize(attrs.indices.size() * d);
      for (std::size_t i = 0; i < attrs.indices.size(); ++i) {
        if (attrs.indices[i] >= sa[0]) {
          shape_fail(kind, sa,
                     "index " + std::to_string(attrs.indices[i]) +
                         " out of range");
        }
        std::copy_n(a.data().data() + attrs.indices[i] * d, d,
                    out.data() + i * d);
      }
      break;
    }
  }

  bool needs_grad = false;
  for (const auto& t : inputs) needs_grad = needs_grad || t.requires_grad();
  Graph* graph = g_active;
  const bool recording = needs_grad && graph != nullptr;
  auto node = new_node(std::move(out_shape), std::move(out), recording);
  if (recording) {
    OpRecord rec{kind, {}, node, attrs, std::move(saved)};
    rec.inputs.reserve(inputs.size());
    for (const auto& t : inputs) rec.inputs.push_back(t.node());
    graph->record(std::move(rec));
  }
  return make_tensor(std::move(node));
}

// ---------------------------------------------------------------------------
// Backward rules

namespace {

void backward_rule(const OpRecord& r, double sgn) {
  const Node& out = *r.output;
  const std::vector<double>& g = out.grad;
  Node& a = *r.inputs[0];
  auto wants = [&](std::size_t i) { return r.inputs[i]->requires_grad; };

  switch (r.kind) {
    case OpKind::matmul: {
      Node& b = *r.inputs[1];
      const MatmulDims d = matmul_dims(a.shape, b.shape);
      for (std::size_t i = 0; i < d.batch; ++i) {
        ConstMap gm(g.data() + i * d.m * d.n, d.m, d.n);
        const std::size_t boff = d.broadcast_b ? 0 : i * d.k * d.n;
        if (wants(0)) {
          ConstMap bm(b.data.data() + boff, d.k, d.n);
          MutMap ga(ensure_grad(a).data() + i * d.m * d.k, d.m, d.k);
          ga.noalias() += sgn * (gm * bm.transpose());
        }
        if (wants(1)) {
          ConstMap am(a.data.data() + i * d.m * d.k, d.m, d.k);
          MutMap gb(ensure_grad(b).data() + boff, d.k, d.n);
          gb.noalias() += sgn * (am.transpose() * gm);
        }
      }
      break;
    }
    case OpKind::add: {
      if (wants(0)) {
        auto& ga = ensure_grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += sgn * g[i];
      }
      if (wants(1)) {
        auto& gb = ensure_grad(*r.inputs[1]);
        const std::size_t nb = gb.size();
        for (std::size_t i = 0; i < g.size(); i += nb) {
          for (std::size_t j = 0; j < nb; ++j) gb[j] += sgn * g[i + j];
        }
      }
      break;
    }
    case OpKind::mul: {
      Node& b = *r.inputs[1];
      if (wants(0)) {
        auto& ga = ensure_grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += sgn * g[i] * b.data[i];
      }
      if (wants(1)) {
        auto& gb = ensure_grad(b);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += sgn * g[i] * a.data[i];
      }
      break;
    }
    case OpKind::scale: {
      auto& ga = ensure_grad(a);
      for (std::size_t i = 0; i < g.size(); ++i)
        ga[i] += sgn * g[i] * r.attrs.scalar;
      break;
    }
    case OpKind::relu: {
      auto& ga = ensure_grad(a);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (a.data[i] > 0.0) ga[i] += sgn * g[i];
      break;
    }
    case OpKind::gelu: {
      auto& ga = ensure_grad(a);
      for (std::size_t i = 0; i < g.size(); ++i)
        ga[i] += sgn * g[i] * gelu_derivative(a.data[i]);
      break;
    }
    case OpKind::sin: {
      auto& ga = ensure_grad(a);
      for (std::size_t i = 0; i < g.size(); ++i)
        ga[i] += sgn * g[i] * std::cos(a.data[i]);
      break;
    }
    case OpKind::softmax_lastdim: {
      auto& ga = ensure_grad(a);
      const std::size_t n = last_dim(a.shape);
      const std::vector<double>& y = out.data;
      for (std::size_t row = 0; row < g.size() / n; ++row) {
        const std::size_t o = row * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += g[o + j] * y[o + j];
        for (std::size_t j = 0; j < n; ++j)
          ga[o + j] += sgn * y[o + j] * (g[o + j] - dot);
      }
      break;
    }
    case OpKind::layernorm_lastdim: {
      const std::size_t n = last_dim(a.shape);
      const std::size_t rows = a.data.size() / n;
      const bool affine = r.inputs.size() == 3;
      const double* xhat = r.saved.data();
      const double* rstd = r.saved.data() + a.data.size();
      if (affine && wants(1)) {
        auto& gg = ensure_grad(*r.inputs[1]);
        for (std::size_t row = 0; row < rows; ++row)
          for (std::size_t j = 0; j < n; ++j)
            gg[j] += sgn * g[row * n + j] * xhat[row * n + j];
      }
      if (affine && wants(2)) {
        auto& gb = ensure_grad(*r.inputs[2]);
        for (std::size_t row = 0; row < rows; ++row)
          for (std::size_t j = 0; j < n; ++j) gb[j] += sgn * g[row * n + j];
      }
      if (wants(0)) {
        auto& ga = ensure_grad(a);
        std::vector<double> dxh(n);
        for (std::size_t row = 0; row < rows; ++row) {
          const std::size_t o = row * n;
          double m1 = 0.0, m2 = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            dxh[j] = g[o + j] * (affine ? r.inputs[1]->data[j] : 1.0);
            m1 += dxh[j];
            m2 += dxh[j] * xhat[o + j];
          }
          m1 /= static_cast<double>(n);
          m2 /= static_cast<double>(n);
          for (std::size_t j = 0; j < n; ++j)
            ga[o + j] += sgn * rstd[row] * (dxh[j] - m1 - xhat[o + j] * m2);
        }
      }
      break;
    }
    case OpKind::sum:
    case OpKind::mean: {
      auto& ga = ensure_grad(a);
      const double v =
          g[0] / (r.kind == OpKind::mean ? static_cast<double>(ga.size()) : 1.0);
      for (double& x : ga) x += sgn * v;
      break;
    }
    case OpKind::mse: {
      Node& t = *r.inputs[1];
      const double k = 2.0 * g[0] / static_cast<double>(a.data.size());
      if (wants(0)) {
        auto& ga = ensure_grad(a);
        for (std::size_t i = 0; i < ga.size(); ++i)
          ga[i] += sgn * k * (a.data[i] - t.data[i]);
      }
      if (wants(1)) {
        auto& gt = ensure_grad(t);
        for (std::size_t i = 0; i < gt.size(); ++i)
          gt[i] -= sgn * k * (a.data[i] - t.data[i]);
      }
      break;
    }
    case OpKind::reshape: {
      auto& ga = ensure_grad(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += sgn * g[i];
      break;
    }
    case OpKind::transpose_last2: {
      auto& ga = ensure_grad(a);
      const std::size_t m = a.shape[a.shape.size() - 2];
      const std::size_t n = a.shape[a.shape.size() - 1];
      for (std::size_t b = 0; b < ga.size() / (m * n); ++b) {
        ConstMap gy(g.data() + b * m * n, n, m);
        MutMap gx(ga.data() + b * m * n, m, n);
        gx += sgn * gy.transpose();
      }
      break;
    }
    case OpKind::concat_lastdim: {
      const std::size_t total = out.shape.back();
      const std::size_t rows = g.size() / total;
      std::size_t offset = 0;
      for (std::size_t k = 0; k < r.inputs.size(); ++k) {
        Node& in = *r.inputs[k];
        const std::size_t w = in.shape.back();
        if (in.requires_grad) {
          auto& gi = ensure_grad(in);
          for (std::size_t row = 0; row < rows; ++row)
            for (std::size_t j = 0; j < w; ++j)
              gi[row * w + j] += sgn * g[row * total + offset + j];
        }
        offset += w;
      }
      break;
    }
    case OpKind::slice_lastdim: {
      auto& ga = ensure_grad(a);
      const std::size_t n = a.shape.back();
      const std::size_t w = r.attrs.end - r.attrs.begin;
      for (std::size_t row = 0; row < g.size() / w; ++row)
        for (std::size_t j = 0; j < w; ++j)
          ga[row * n + r.attrs.begin + j] += sgn * g[row * w + j];
      break;
    }
    case OpKind::embedding_lookup: {
      auto& ga = ensure_grad(a);
      const std::size_t d = a.shape[1];
      for (std::size_t i = 0; i < r.attrs.indices.size(); ++i) {
        double* dst = ga.data() + r.attrs.indices[i] * d;
        for (std::size_t j = 0; j < d; ++j) dst[j] += sgn * g[i * d + j];
      }
      break;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Typed wrappers

Tensor matmul(const Tensor& a, const Tensor& b) {
  const Tensor in[] = {a, b};
  return apply(OpKind::matmul, in);
}
Tensor add(const Tensor& a, const Tensor& b) {
  const Tensor in[] = {a, b};
  return apply(OpKind::add, in);
}
Tensor mul(const Tensor& a, const Tensor& b) {
  const Tensor in[] = {a, b};
  return apply(OpKind::mul, in);
}
Tensor scale(const Tensor& a, double factor) {
  OpAttrs attrs;
  attrs.scalar = factor;
  return apply(OpKind::scale, std::span(&a, 1), attrs);
}
Tensor relu(const Tensor& a) { return apply(OpKind::relu, std::span(&a, 1)); }
Tensor gelu(const Tensor& a) { return apply(OpKind::gelu, std::span(&a, 1)); }
Tensor sin(const Tensor& a) { return apply(OpKind::sin, std::span(&a, 1)); }
Tensor softmax_lastdim(const Tensor& a) {
  return apply(OpKind::softmax_lastdim, std::span(&a, 1));
}
Tensor layernorm_lastdim(const Tensor& x, double eps) {
  OpAttrs attrs;
  attrs.eps = eps;
  return apply(OpKind::layernorm_lastdim, std::span(&x, 1), attrs);
}
Tensor layernorm_lastdim(const Tensor& x, const Tensor& gamma,
                         const Tensor& beta, double eps) {
  OpAttrs attrs;
  attrs.eps = eps;
  const Tensor in[] = {x, gamma, beta};
  return apply(OpKind::layernorm_lastdim, in, attrs);
}
Tensor sum(const Tensor& a) { return apply(OpKind::sum, std::span(&a, 1)); }
Tensor mean(const Tensor& a) { return apply(OpKind::mean, std::span(&a, 1)); }
Tensor mse(const Tensor& pred, const Tensor& target) {
  const Tensor in[] = {pred, target};
  return apply(OpKind::mse, in);
}
Tensor reshape(const Tensor& a, Shape shape) {
  OpAttrs attrs;
  attrs.shape = std::move(shape);
  return apply(OpKind::reshape, std::span(&a, 1), attrs);
}
Tensor transpose_last2(const Tensor& a) {
  return apply(OpKind::transpose_last2, std::span(&a, 1));
}
Tensor concat_lastdim(std::span<const Tensor> parts) {
  return apply(OpKind::concat_lastdim, parts);
}
Tensor slice_lastdim(const Tensor& a, std::size_t begin, std::size_t end) {
  OpAttrs attrs;
  attrs.begin = begin;
  attrs.end = end;
  return apply(OpKind::slice_lastdim, std::span(&a, 1), attrs);
}
Tensor embedding_lookup(const Tensor& table,
                        std::span<const std::size_t> indices) {
  OpAttrs attrs;
  attrs.indices.assign(indices.begin(), indices.end());
  return apply(OpKind::embedding_lookup, std::span(&table, 1), attrs);
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.size() == 1) return parts[0];
  std::vector<Tensor> cols;
  cols.reserve(parts.size());
  for (const auto& p : parts) cols.push_back(transpose_last2(p));
  return transpose_last2(concat_lastdim(cols));
}

// ---------------------------------------------------------------------------
// Gradient checking

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const std::function<Tensor()>& builder,
                           std::span<const NamedTensor> params,
                           double tolerance, double step) {
  GradCheckReport report;
  report.tolerance = tolerance;
  for (const auto& p : params) p.tensor.node()->grad.clear();

  {
    Graph graph;
    auto active = graph.activate();
    Tensor loss = builder();
    graph.backward(loss);
  }

  report.passed = true;
  for (const auto& p : params) {
    GradCheckEntry entry{p.name, p.tensor.size(), 0.0};
    const std::vector<double> analytic = p.tensor.grad_or_zeros();
    std::vector<double>& values = p.tensor.node()->data;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = builder().item();
      values[i] = saved - step;
      const double down = builder().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      entry.max_rel_error =
          std::max(entry.max_rel_error, relative_error(analytic[i], numeric));
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    if (!(entry.max_rel_error < tolerance)) report.passed = false;
    report.entries.push_back(std::move(entry));
  }
  for (const auto& p : params) p.tensor.node()->grad.clear();
  return report;
}

}  // namespace minr::ad
