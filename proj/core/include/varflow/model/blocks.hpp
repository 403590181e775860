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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "varflow/numerics/layers.hpp"

namespace varflow::model {

/// Dropout switch threaded through a forward pass. A null rng disables all
/// dropout regardless of the rates.
struct ForwardContext {
  double encoder_dropout = 0.0;
  double decoder_dropout = 0.0;
  num::Rng* rng = nullptr;

  static ForwardContext inference() { return {}; }
};

/// Sinusoidal position table, length x dim.
num::Tensor positional_encoding(std::size_t length, std::size_t dim);

/// 0 for real keys, a large negative number for padding.
num::Tensor attention_key_bias(std::span<const std::uint8_t> mask);

class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(num::ParameterSet& params, const std::string& name, std::size_t dim, std::size_t heads,
                     num::Rng& rng);
  num::Tensor operator()(const num::Tensor& x, const num::Tensor& key_bias) const;

 private:
  std::size_t heads_ = 1;
  num::Linear q_, k_, v_, out_;
};

/// Self-attention and a two-layer convolutional feed-forward, each wrapped in
/// residual + layer norm. Padding rows are zeroed after every sub-layer.
class FftBlock {
 public:
  FftBlock() = default;
  FftBlock(num::ParameterSet& params, const std::string& name, std::size_t dim, std::size_t heads,
           std::size_t ff_hidden, std::size_t kernel, num::Rng& rng);
  num::Tensor operator()(const num::Tensor& x, const num::Tensor& mask_col, const num::Tensor& key_bias,
                         double dropout, num::Rng* rng) const;

 private:
  MultiHeadAttention attention_;
  num::LayerNorm norm1_, norm2_;
  num::Conv1d ff1_, ff2_;
};

class FftStack {
 public:
  FftStack() = default;
  FftStack(num::ParameterSet& params, const std::string& name, std::size_t layers, std::size_t dim,
           std::size_t heads, std::size_t ff_hidden, std::size_t kernel, num::Rng& rng);
  /// Adds positions, then runs every block.
  num::Tensor operator()(const num::Tensor& x, std::span<const std::uint8_t> mask, double dropout,
                         num::Rng* rng) const;

 private:
  std::vector<FftBlock> blocks_;
};

/// conv-relu-norm-dropout twice, then a linear head to one value per row.
class ScalarPredictor {
 public:
  ScalarPredictor() = default;
  ScalarPredictor(num::ParameterSet& params, const std::string& name, std::size_t in, std::size_t hidden,
                  std::size_t kernel, num::Rng& rng);
  num::Tensor operator()(const num::Tensor& h, const num::Tensor& mask_col, double dropout, num::Rng* rng) const;

 private:
  num::Conv1d conv1_, conv2_;
  num::LayerNorm norm1_, norm2_;
  num::Linear head_;
};

}  // namespace varflow::model
