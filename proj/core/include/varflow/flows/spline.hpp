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
#include <span>
#include <vector>

#include "varflow/numerics/tensor.hpp"

namespace varflow::flows {

/// Shape of a monotonic rational-quadratic spline on [-bound, bound] with
/// identity tails outside. Raw parameters per element are laid out as
/// [bins widths | bins heights | bins-1 interior derivatives].
struct SplineConfig {
  int bins = 10;
  double bound = 5.0;
  double min_bin_width = 1e-3;
  double min_bin_height = 1e-3;
  double min_derivative = 1e-3;

  std::size_t raw_size() const { return static_cast<std::size_t>(3 * bins - 1); }
  void validate() const;
};

/// Constrained spline: knot positions and knot derivatives. Boundary
/// derivatives are 1 so the map joins the linear tails smoothly.
struct SplineKnots {
  std::vector<double> x;  // bins + 1, x.front() = -bound, x.back() = bound
  std::vector<double> y;  // bins + 1
  std::vector<double> d;  // bins + 1, d.front() = d.back() = 1
};

/// Unconstrained raw values for one element plus the interval bound.
struct SplineParams {
  std::span<const double> raw;
  const SplineConfig* config = nullptr;
};

struct SplineValue {
  double value = 0.0;
  double logdet = 0.0;
};

/// Maps raw values to knots: softmax widths/heights floored at the minimum
/// bin size, softplus derivatives shifted so that raw = 0 gives derivative 1.
/// All-zero raw values therefore produce the identity map.
SplineKnots constrain(const SplineParams& p);

SplineValue rq_spline_forward(double x, const SplineParams& p);

/// Solves the per-bin quadratic in its cancellation-free form.
/// logdet is that of the inverse map, i.e. -logdet of the forward at the result.
SplineValue rq_spline_inverse(double y, const SplineParams& p);

/// Adjoint of rq_spline_forward for a single element: accumulates into
/// grad_x and grad_raw given upstream gradients of (value, logdet).
void rq_spline_backward(double x, const SplineParams& p, double grad_value, double grad_logdet,
                        double& grad_x, std::span<double> grad_raw);

/// Differentiable batched forward: x is n x 1, raw is n x raw_size().
/// Returns n x 2 with columns (y, logdet).
num::Tensor rq_spline(const num::Tensor& x, const num::Tensor& raw, const SplineConfig& config);

}  // namespace varflow::flows
