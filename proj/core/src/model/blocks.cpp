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

#include "varflow/model/blocks.hpp"

#include <cmath>

namespace varflow::model {

using num::Tensor;

Tensor positional_encoding(std::size_t length, std::size_t dim) {
  std::vector<double> v(length * dim);
  for (std::size_t p = 0; p < length; ++p) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(dim));
      v[p * dim + i] = i % 2 == 0 ? std::sin(p * rate) : std::cos(p * rate);
    }
  }
  return Tensor::from(length, dim, std::move(v));
}

Tensor attention_key_bias(std::span<const std::uint8_t> mask) {
  std::vector<double> v(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) v[i] = mask[i] ? 0.0 : -1e9;
  return Tensor::from(1, mask.size(), std::move(v));
}

MultiHeadAttention::MultiHeadAttention(num::ParameterSet& params, const std::string& name, std::size_t dim,
                                       std::size_t heads, num::Rng& rng)
    : heads_(heads),
      q_(params, name + ".query", dim, dim, rng),
      k_(params, name + ".key", dim, dim, rng),
      v_(params, name + ".value", dim, dim, rng),
      out_(params, name + ".out", dim, dim, rng) {}

Tensor MultiHeadAttention::operator()(const Tensor& x, const Tensor& key_bias) const {
  const Tensor q = q_(x), k = k_(x), v = v_(x);
  const std::size_t width = x.cols() / heads_;
  std::vector<Tensor> heads;
  for (std::size_t h = 0; h < heads_; ++h) {
    const std::size_t a = h * width, b = a + width;
    heads.push_back(num::scaled_dot_product_attention(num::slice_cols(q, a, b), num::slice_cols(k, a, b),
                                                      num::slice_cols(v, a, b), key_bias));
  }
  return out_(heads_ == 1 ? heads[0] : num::concat_cols(heads));
}

FftBlock::FftBlock(num::ParameterSet& params, const std::string& name, std::size_t dim, std::size_t heads,
                   std::size_t ff_hidden, std::size_t kernel, num::Rng& rng)
    : attention_(params, name + ".attention", dim, heads, rng),
      norm1_(params, name + ".norm1", dim),
      norm2_(params, name + ".norm2", dim),
      ff1_(params, name + ".ff1", dim, ff_hidden, kernel, rng),
      ff2_(params, name + ".ff2", ff_hidden, dim, 1, rng) {}

Tensor FftBlock::operator()(const Tensor& x, const Tensor& mask_col, const Tensor& key_bias, double dropout,
                            num::Rng* rng) const {
  auto drop = [&](const Tensor& t) { return rng != nullptr ? num::dropout(t, dropout, *rng) : t; };
  Tensor a = drop(attention_(x, key_bias));
  Tensor y = num::mul(norm1_(num::add(x, a)), mask_col);
  Tensor f = drop(ff2_(num::relu(ff1_(y))));
  return num::mul(norm2_(num::add(y, f)), mask_col);
}

FftStack::FftStack(num::ParameterSet& params, const std::string& name, std::size_t layers, std::size_t dim,
                   std::size_t heads, std::size_t ff_hidden, std::size_t kernel, num::Rng& rng) {
  for (std::size_t i = 0; i < layers; ++i) {
    blocks_.emplace_back(params, name + ".block" + std::to_string(i), dim, heads, ff_hidden, kernel, rng);
  }
}

Tensor FftStack::operator()(const Tensor& x, std::span<const std::uint8_t> mask, double dropout,
                            num::Rng* rng) const {
  const Tensor mask_col = num::mask_column(mask);
  const Tensor bias = attention_key_bias(mask);
  Tensor y = num::mul(num::add(x, positional_encoding(x.rows(), x.cols())), mask_col);
  for (const FftBlock& b : blocks_) y = b(y, mask_col, bias, dropout, rng);
  return y;
}

ScalarPredictor::ScalarPredictor(num::ParameterSet& params, const std::string& name, std::size_t in,
                                 std::size_t hidden, std::size_t kernel, num::Rng& rng)
    : conv1_(params, name + ".conv1", in, hidden, kernel, rng),
      conv2_(params, name + ".conv2", hidden, hidden, kernel, rng),
      norm1_(params, name + ".norm1", hidden),
      norm2_(params, name + ".norm2", hidden),
      head_(params, name + ".head", hidden, 1, rng) {}

Tensor ScalarPredictor::operator()(const Tensor& h, const Tensor& mask_col, double dropout, num::Rng* rng) const {
  auto drop = [&](const Tensor& t) { return rng != nullptr ? num::dropout(t, dropout, *rng) : t; };
  Tensor y = num::mul(drop(norm1_(num::relu(conv1_(h)))), mask_col);
  y = num::mul(drop(norm2_(num::relu(conv2_(y)))), mask_col);
  return num::mul(head_(y), mask_col);
}

}  // namespace varflow::model
