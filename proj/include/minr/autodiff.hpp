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

#ifndef MINR_AUTODIFF_HPP_
#define MINR_AUTODIFF_HPP_

// Minimal reverse-mode automatic differentiation over dense float64 tensors.
//
// Operations are free functions. When any input requires a gradient and a
// Graph is active on the calling thread, the operation is appended to that
// graph's tape; Graph::backward then walks the tape in reverse. Without an
// active graph every operation is a plain forward evaluation, which is what
// evaluation workers and finite-difference probes use.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minr/error.hpp"

namespace minr::ad {

using Shape = std::vector<std::size_t>;

std::size_t num_elements(const Shape& shape);
std::string shape_string(const Shape& shape);

enum class OpKind {
  matmul,
  add,
  mul,
  scale,
  relu,
  gelu,
  sin,
  softmax_lastdim,
  layernorm_lastdim,
  sum,
  mean,
  mse,
  reshape,
  transpose_last2,
  concat_lastdim,
  slice_lastdim,
  embedding_lookup,
};

inline constexpr OpKind kAllOps[] = {
    OpKind::matmul,          OpKind::add,
    OpKind::mul,             OpKind::scale,
    OpKind::relu,            OpKind::gelu,
    OpKind::sin,             OpKind::softmax_lastdim,
    OpKind::layernorm_lastdim, OpKind::sum,
    OpKind::mean,            OpKind::mse,
    OpKind::reshape,         OpKind::transpose_last2,
    OpKind::concat_lastdim,  OpKind::slice_lastdim,
    OpKind::embedding_lookup,
};

std::string_view op_name(OpKind kind);

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  std::uint64_t id = 0;
  bool requires_grad = false;
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t size() const { return node_->data.size(); }
  std::uint64_t id() const { return node_->id; }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const double> data() const { return node_->data; }
  // Mutation is reserved for leaves: parameters under an optimizer and
  // freshly built inputs.
  std::span<double> mutable_data() { return node_->data; }
  double item() const;
  double operator[](std::size_t i) const { return node_->data[i]; }

  bool has_grad() const { return !node_->grad.empty(); }
  // Zero-filled view when no gradient has been accumulated yet.
  std::span<double> mutable_grad();
  std::vector<double> grad_or_zeros() const;
  void zero_grad() { node_->grad.clear(); }

  // Shares storage; the returned tensor is a new leaf only if detached.
  Tensor detach() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  friend Tensor make_tensor(std::shared_ptr<Node>);
  std::shared_ptr<Node> node_;
};

Tensor make_tensor(std::shared_ptr<Node> node);

struct OpAttrs {
  double scalar = 0.0;
  double eps = 1e-5;
  std::size_t begin = 0;
  std::size_t end = 0;
  Shape shape;
  std::vector<std::size_t> indices;
};

struct OpRecord {
  OpKind kind;
  std::vector<std::shared_ptr<Node>> inputs;
  std::shared_ptr<Node> output;
  OpAttrs attrs;
  std::vector<double> saved;
};

// Tape of recorded operations. Recorded order is a topological order since
// an op can only consume tensors that already exist.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  ~Graph();

  // Makes this graph the recording target on the current thread for the
  // lifetime of the returned guard.
  class Activation {
   public:
    explicit Activation(Graph& graph);
    Activation(const Activation&) = delete;
    Activation& operator=(const Activation&) = delete;
    ~Activation();

   private:
    Graph* previous_;
  };
  [[nodiscard]] Activation activate() { return Activation(*this); }

  static Graph* active();

  std::size_t size() const { return ops_.size(); }
  const std::vector<OpRecord>& ops() const { return ops_; }
  bool consumed() const { return consumed_; }

  // Accumulates dLoss/dT into every requires_grad tensor reachable from the
  // loss, then frees the tape. A second call needs reset() first.
  void backward(const Tensor& loss);
  void reset();

  void record(OpRecord record);

 private:
  std::vector<OpRecord> ops_;
  bool consumed_ = false;
};

// Rejects non-finite inputs to every op when enabled (thread-local).
void set_debug_checks(bool enabled);
bool debug_checks();

Tensor apply(OpKind kind, std::span<const Tensor> inputs,
             const OpAttrs& attrs = {});

Tensor matmul(const Tensor& a, const Tensor& b);
// b must match a's shape or a's trailing dimensions.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor relu(const Tensor& a);
// tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
Tensor gelu(const Tensor& a);
Tensor sin(const Tensor& a);
Tensor softmax_lastdim(const Tensor& a);
Tensor layernorm_lastdim(const Tensor& x, double eps = 1e-5);
Tensor layernorm_lastdim(const Tensor& x, const Tensor& gamma,
                         const Tensor& beta, double eps = 1e-5);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor mse(const Tensor& pred, const Tensor& target);
Tensor reshape(const Tensor& a, Shape shape);
Tensor transpose_last2(const Tensor& a);
Tensor concat_lastdim(std::span<const Tensor> parts);
Tensor slice_lastdim(const Tensor& a, std::size_t begin, std::size_t end);
// Gathers rows of a rank-2 table; gradients scatter-add back.
Tensor embedding_lookup(const Tensor& table,
                        std::span<const std::size_t> indices);

// Concatenation along the leading axis of rank-2 tensors, composed from
// transpose_last2 and concat_lastdim.
Tensor concat_rows(std::span<const Tensor> parts);

constexpr double kGeluCoeff = 0.044715;
constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2/pi)

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct GradCheckEntry {
  std::string name;
  std::size_t elements = 0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;
  double max_rel_error = 0.0;
  bool passed = false;
};

// Element-wise |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

// Compares analytic gradients of the scalar built by `builder` against
// central finite differences for every element of every listed tensor.
// Failures are reported, never thrown.
GradCheckReport grad_check(const std::function<Tensor()>& builder,
                           std::span<const NamedTensor> params,
                           double tolerance, double step = 1e-5);

namespace testing {

// Negates the input gradients produced by one backward rule while alive.
// Negative-control hook for grad_check.
class ScopedRuleCorruption {
 public:
  explicit ScopedRuleCorruption(OpKind kind);
  ScopedRuleCorruption(const ScopedRuleCorruption&) = delete;
  ScopedRuleCorruption& operator=(const ScopedRuleCorruption&) = delete;
  ~ScopedRuleCorruption();

 private:
  int previous_;
};

}  // namespace testing

}  // namespace minr::ad

#endif  // MINR_AUTODIFF_HPP_
