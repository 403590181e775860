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

#include "varflow/numerics/layers.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace varflow::num {

namespace {

std::vector<double> init_weights(std::size_t fan_in, std::size_t fan_out, std::size_t count, Rng& rng,
                                 Init init) {
  std::vector<double> w(count, 0.0);
  if (init == Init::zeros) return w;
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : w) v = dist(rng);
  return w;
}

}  // namespace

Linear::Linear(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
               Init init) {
  weight_ = params.create(name + ".weight", in, out, init_weights(in, out, in * out, rng, init));
  bias_ = params.create(name + ".bias", 1, out, std::vector<double>(out, 0.0));
}

Conv1d::Conv1d(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
               std::size_t kernel, Rng& rng, Init init)
    : kernel_(kernel) {
  weight_ = params.create(name + ".weight", kernel * in, out,
                          init_weights(kernel * in, kernel * out, kernel * in * out, rng, init));
  bias_ = params.create(name + ".bias", 1, out, std::vector<double>(out, 0.0));
}

LayerNorm::LayerNorm(ParameterSet& params, const std::string& name, std::size_t dim) {
  gain_ = params.create(name + ".gain", 1, dim, std::vector<double>(dim, 1.0));
  bias_ = params.create(name + ".bias", 1, dim, std::vector<double>(dim, 0.0));
}

}  // namespace varflow::num
