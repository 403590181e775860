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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "varflow/numerics/tensor.hpp"

namespace varflow::num {

/// Ordered, named registry of trainable leaves. Registration order is the
/// iteration order everywhere (optimizer state, checkpoints), which keeps
/// runs reproducible.
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  Tensor add(std::string name, Tensor tensor);
  Tensor create(std::string name, std::size_t rows, std::size_t cols, std::vector<double> init);

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;
  std::size_t scalar_count(std::string_view prefix) const;

  const Tensor* find(std::string_view name) const;
  Tensor* find(std::string_view name);

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();
  double grad_norm() const;

 private:
  std::vector<Entry> entries_;
};

}  // namespace varflow::num
