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

#include <functional>
#include <span>
#include <vector>

#include "varflow/numerics/tensor.hpp"

namespace varflow::num {

/// Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps) per coordinate.
std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x, double eps = 1e-6);

/// Same, perturbing a leaf tensor in place and re-evaluating `f`. The tensor
/// is restored bit-exactly afterwards.
std::vector<double> finite_diff_grad(const std::function<double()>& f, Tensor& leaf,
                                     double eps = 1e-6);

/// ||a - b|| / max(||a||, ||b||, floor). Zero when both are (near) zero.
double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-12);

}  // namespace varflow::num
