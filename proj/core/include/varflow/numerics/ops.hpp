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
#include <vector>

#include "varflow/numerics/tensor.hpp"

// Differentiable primitives. Binary elementwise ops broadcast a dimension of
// size 1 against the other operand (row vectors, column vectors, scalars).
namespace varflow::num {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }

Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);
Tensor neg(const Tensor& a);

Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor pow(const Tensor& a, double exponent);
Tensor square(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Column sums: rows x cols -> 1 x cols.
Tensor sum_rows(const Tensor& a);
// Row sums: rows x cols -> rows x 1.
Tensor sum_cols(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
// out.row(i) = a.row(index[i]); the adjoint scatter-adds.
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index);
Tensor embedding(const Tensor& table, std::span<const int> ids);

Tensor softmax_rows(const Tensor& a);
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

/// "Same"-padded 1-D convolution over rows. `weight` is (kernel*in) x out with
/// tap-major rows; `bias` is 1 x out. Kernel must be odd.
Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t kernel);

/// Inverted dropout; draws from `rng` only when p > 0.
Tensor dropout(const Tensor& a, double p, Rng& rng);

/// softmax(q k^T / sqrt(d) + key_bias) v, with key_bias a 1 x keys row of 0
/// (attend) or a large negative value (masked).
Tensor scaled_dot_product_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                                    const Tensor& key_bias);

/// Constant rows x 1 tensor from a 0/1 mask.
Tensor mask_column(std::span<const std::uint8_t> mask);

}  // namespace varflow::num
