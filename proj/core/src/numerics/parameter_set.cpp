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

#include "varflow/numerics/parameter_set.hpp"

#include <cmath>
#include <stdexcept>

namespace varflow::num {

Tensor ParameterSet::add(std::string name, Tensor tensor) {
  if (find(name) != nullptr) throw std::logic_error("duplicate parameter name: " + name);
  tensor.node()->requires_grad = true;
  entries_.push_back({std::move(name), std::move(tensor)});
  return entries_.back().tensor;
}

Tensor ParameterSet::create(std::string name, std::size_t rows, std::size_t cols,
                            std::vector<double> init) {
  return add(std::move(name), Tensor::from(rows, cols, std::move(init), true));
}

std::size_t ParameterSet::scalar_count() const { return scalar_count(""); }

std::size_t ParameterSet::scalar_count(std::string_view prefix) const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (e.name.starts_with(prefix)) n += e.tensor.size();
  }
  return n;
}

const Tensor* ParameterSet::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e.tensor;
  }
  return nullptr;
}

Tensor* ParameterSet::find(std::string_view name) {
  for (auto& e : entries_) {
    if (e.name == name) return &e.tensor;
  }
  return nullptr;
}

void ParameterSet::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

double ParameterSet::grad_norm() const {
  double sq = 0.0;
  for (const auto& e : entries_) {
    if (!e.tensor.has_grad()) continue;
    for (double g : e.tensor.node()->grad) sq += g * g;
  }
  return std::sqrt(sq);
}

}  // namespace varflow::num
