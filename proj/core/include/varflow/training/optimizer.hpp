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

#include <cstdint>
#include <vector>

#include "varflow/numerics/parameter_set.hpp"

namespace varflow::training {

/// scale * d_model^-0.5 * min(step^-0.5, step * warmup^-1.5). step >= 1.
double noam_lr(std::int64_t step, std::size_t d_model, std::int64_t warmup, double scale);

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
  double weight_decay = 0.01;
};

/// Adam with decoupled weight decay. Moment buffers follow the parameter
/// set's registration order.
class AdamW {
 public:
  AdamW(const num::ParameterSet& params, AdamWConfig config);

  void step(num::ParameterSet& params, double lr);

  const AdamWConfig& config() const { return config_; }
  std::int64_t steps() const { return steps_; }
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  void set_steps(std::int64_t s) { steps_ = s; }

 private:
  AdamWConfig config_;
  std::int64_t steps_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Rescales all gradients so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_grad_norm(num::ParameterSet& params, double max_norm);

}  // namespace varflow::training
