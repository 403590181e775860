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

#include "varflow/numerics/tensor.hpp"

#include <stdexcept>
#include <string>
#include <unordered_set>

namespace varflow::num {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

std::span<double> Node::grad_span() {
  if (grad.empty()) {
    grad.assign(value.size(), 0.0);
  }
  return grad;
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  return full(rows, cols, 0.0, requires_grad);
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double value, bool requires_grad) {
  return from(rows, cols, std::vector<double>(rows * cols, value), requires_grad);
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> values,
                    bool requires_grad) {
  if (values.size() != rows * cols) {
    throw std::invalid_argument("Tensor::from: " + std::to_string(values.size()) +
                                " values for shape " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  auto node = std::make_shared<Node>();
  node->rows = rows;
  node->cols = cols;
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::from(const Matrix& m, bool requires_grad) {
  return from(m.rows(), m.cols(), m.data(), requires_grad);
}

Tensor Tensor::column(std::span<const double> values) {
  return from(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::scalar(double value) { return from(1, 1, {value}); }

double Tensor::item() const {
  if (size() != 1) {
    throw std::logic_error("Tensor::item on a non-scalar tensor");
  }
  return node_->value[0];
}

std::vector<double> Tensor::grad() const {
  if (node_->grad.empty()) {
    return std::vector<double>(size(), 0.0);
  }
  return node_->grad;
}

Tensor Tensor::detach() const { return from(rows(), cols(), node_->value); }

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor make_op(std::size_t rows, std::size_t cols, std::vector<double> value,
               const std::vector<Tensor>& parents, BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->rows = rows;
  node->cols = cols;
  node->value = std::move(value);
  if (g_grad_enabled) {
    for (const auto& p : parents) {
      if (p.requires_grad()) {
        node->requires_grad = true;
        break;
      }
    }
  }
  if (node->requires_grad) {
    node->parents.reserve(parents.size());
    for (const auto& p : parents) {
      node->parents.push_back(p.node());
    }
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

Tensor make_op(std::size_t rows, std::size_t cols, std::vector<double> value,
               std::initializer_list<Tensor> parents, BackwardFn backward) {
  return make_op(rows, cols, std::move(value), std::vector<Tensor>(parents), std::move(backward));
}

std::vector<Node*> trace(const Tensor& root) {
  std::vector<Node*> order;
  if (!root.requires_grad()) {
    return order;
  }
  std::unordered_set<Node*> visited;
  // Iterative post-order DFS; frame = (node, next parent index).
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw std::logic_error("backward: loss must be a scalar (1x1) tensor");
  }
  if (!loss.requires_grad()) {
    return;
  }
  const auto order = trace(loss);
  loss.node()->grad_span()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->is_leaf()) {
      continue;
    }
    if (!node->grad.empty()) {
      node->backward(*node);
    }
    node->grad.clear();
    node->grad.shrink_to_fit();
  }
}

}  // namespace varflow::num
