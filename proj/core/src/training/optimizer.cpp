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

#include "varflow/training/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace varflow::training {

double noam_lr(std::int64_t step, std::size_t d_model, std::int64_t warmup, double scale) {
  if (step < 1) throw std::invalid_argument("noam_lr: step must be >= 1");
  if (warmup < 1) throw std::invalid_argument("noam_lr: warmup must be >= 1");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(warmup);
  return scale / std::sqrt(static_cast<double>(d_model)) * std::min(1.0 / std::sqrt(s), s * std::pow(w, -1.5));
}

AdamW::AdamW(const num::ParameterSet& params, AdamWConfig config) : config_(config) {
  for (const auto& e : params) {
    m_.emplace_back(e.tensor.size(), 0.0);
    v_.emplace_back(e.tensor.size(), 0.0);
  }
}

void AdamW::step(num::ParameterSet& params, double lr) {
  if (params.size() != m_.size()) throw std::logic_error("optimizer state does not match the parameter set");
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double decay = 1.0 - lr * config_.weight_decay;
  std::size_t i = 0;
  for (auto& e : params) {
    auto w = e.tensor.mutable_values();
    const std::vector<double> g = e.tensor.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      w[j] = w[j] * decay - lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
    ++i;
  }
}

double clip_grad_norm(num::ParameterSet& params, double max_norm) {
  const double norm = params.grad_norm();
  if (!(norm > max_norm)) return norm;
  const double factor = max_norm / norm;
  for (auto& e : params) {
    if (!e.tensor.has_grad()) continue;
    for (double& g : e.tensor.mutable_grad()) g *= factor;
  }
  return norm;
}

}  // namespace varflow::training
