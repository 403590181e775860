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

#include "varflow/flows/spline.hpp"
#include "varflow/numerics/layers.hpp"
#include "varflow/numerics/parameter_set.hpp"

namespace varflow::flows {

struct FlowConfig {
  int layers = 4;
  std::size_t condition_channels = 32;  // width of h
  std::size_t hidden = 32;              // conditioning network width
  std::size_t kernel = 3;
  SplineConfig spline;
};

/// One rational-quadratic coupling transform over a 2-channel sequence.
/// The channel selected by `parity` is transformed; the other channel and the
/// squeezed h feed the conditioning network, whose output projection starts
/// at zero so a fresh layer is the identity.
class CouplingLayer {
 public:
  CouplingLayer(num::ParameterSet& params, const std::string& name, const FlowConfig& config,
                int parity, num::Rng& rng);

  int parity() const { return parity_; }

  /// Raw spline parameters (n x raw_size) for every squeezed position.
  num::Tensor condition(const num::Tensor& identity, const num::Tensor& identity_mask,
                        const num::Tensor& h_squeezed, const num::Tensor& pair_mask) const;

 private:
  int parity_;
  num::Conv1d conv1_, conv2_;
  num::LayerNorm norm1_, norm2_;
  num::Linear proj_;
};

struct FlowForward {
  num::Tensor z;                            // T x 1
  num::Tensor sum_logdet;                   // 1 x 1, real frames only
  std::vector<num::Tensor> layer_logdets;   // one 1 x 1 per layer
};

struct FlowSample {
  std::vector<double> z;
  std::vector<double> x;
};

/// Conditional flow over a scalar-per-frame sequence. Adjacent frames are
/// squeezed into two channels; odd lengths are padded with a copy of the last
/// frame which is masked out of every sum.
class FlowStack {
 public:
  FlowStack(num::ParameterSet& params, const std::string& name, const FlowConfig& config, num::Rng& rng);

  std::size_t layers() const { return layers_.size(); }
  const FlowConfig& config() const { return config_; }

  /// x is T x 1, h is T x condition_channels, mask has T entries.
  FlowForward forward(const num::Tensor& x, const num::Tensor& h, std::span<const std::uint8_t> mask) const;

  /// Exact inverse of forward; no gradient.
  std::vector<double> inverse(std::span<const double> z, const num::Tensor& h,
                              std::span<const std::uint8_t> mask) const;

  /// -(log N(z; 0, I) + sum_logdet) summed over real frames.
  num::Tensor nll_sum(const FlowForward& fwd, std::span<const std::uint8_t> mask) const;
  /// nll_sum divided by the real-frame count.
  num::Tensor nll(const num::Tensor& x, const num::Tensor& h, std::span<const std::uint8_t> mask) const;

  /// z ~ N(0, sigma^2) on real frames (0 elsewhere), x = inverse(z).
  FlowSample sample(const num::Tensor& h, std::span<const std::uint8_t> mask, double sigma, num::Rng& rng) const;

 private:
  FlowConfig config_;
  std::vector<CouplingLayer> layers_;
};

/// log N(v; 0, 1)
double standard_normal_logpdf(double v);

}  // namespace varflow::flows
