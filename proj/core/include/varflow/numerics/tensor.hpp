// Copyright 2026 The varflow Authors
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

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "varflow/numerics/matrix.hpp"

namespace varflow::num {

using Rng = std::mt19937_64;

struct Node;
using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(Node&)>;

/// One recorded value in the computation trace. Parents are kept alive by
/// the child so the trace can be replayed in reverse after the forward pass.
struct Node {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  BackwardFn backward;

  bool is_leaf() const { return !backward; }
  // Allocates (zeroed) on first use.
  std::span<double> grad_span();
};

/// 2-D tensor handle (rows = time/positions, cols = channels). Copies share
/// the underlying node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
  static Tensor full(std::size_t rows, std::size_t cols, double value, bool requires_grad = false);
  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor from(const Matrix& m, bool requires_grad = false);
  static Tensor column(std::span<const double> values);
  static Tensor scalar(double value);

  bool defined() const { return static_cast<bool>(node_); }
  std::size_t rows() const { return node_->rows; }
  std::size_t cols() const { return node_->cols; }
  std::size_t size() const { return node_->value.size(); }

  double operator()(std::size_t r, std::size_t c) const { return node_->value[r * node_->cols + c]; }
  double item() const;

  std::span<const double> values() const { return node_->value; }
  // Direct edits are only meaningful on leaves (parameters, inputs).
  std::span<double> mutable_values() { return node_->value; }
  Matrix to_matrix() const { return Matrix(rows(), cols(), node_->value); }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  // Zero-filled view when no gradient has been accumulated yet.
  std::vector<double> grad() const;
  std::span<double> mutable_grad() { return node_->grad_span(); }
  void zero_grad() { node_->grad.clear(); }

  // Same values, no history.
  Tensor detach() const;

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

/// Gradient recording is on by default; a guard disables it for the current
/// thread (inference, oracles).
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Builds the output node of a primitive. History (parents + adjoint) is
/// only recorded when grad mode is on and a parent requires a gradient.
Tensor make_op(std::size_t rows, std::size_t cols, std::vector<double> value,
               std::initializer_list<Tensor> parents, BackwardFn backward);
Tensor make_op(std::size_t rows, std::size_t cols, std::vector<double> value,
               const std::vector<Tensor>& parents, BackwardFn backward);

/// Topologically ordered nodes reachable from `root` that require grad.
std::vector<Node*> trace(const Tensor& root);

/// Reverse-mode sweep from a scalar. Leaf gradients accumulate across calls;
/// intermediate gradients are released once consumed.
void backward(const Tensor& loss);

}  // namespace varflow::num
