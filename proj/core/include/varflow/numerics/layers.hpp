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

#include "varflow/numerics/ops.hpp"
#include "varflow/numerics/parameter_set.hpp"

namespace varflow::num {

enum class Init { xavier, zeros };

class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
         Init init = Init::xavier);
  Tensor operator()(const Tensor& x) const { return add(matmul(x, weight_), bias_); }

  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }

 private:
  Tensor weight_;
  Tensor bias_;
};

class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
         std::size_t kernel, Rng& rng, Init init = Init::xavier);
  Tensor operator()(const Tensor& x) const { return conv1d(x, weight_, bias_, kernel_); }

 private:
  Tensor weight_;
  Tensor bias_;
  std::size_t kernel_ = 1;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterSet& params, const std::string& name, std::size_t dim);
  Tensor operator()(const Tensor& x) const { return layer_norm(x, gain_, bias_); }

 private:
  Tensor gain_;
  Tensor bias_;
};

}  // namespace varflow::num
