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
#include <string_view>

#include "varflow/flows/flow.hpp"

namespace varflow::model {

/// How pitch and energy reach the decoder.
///  flow:     decoder sees proj(z), z = flow(x; h)
///  reversed: decoder sees proj(x); the flow is trained on the side
///  mse:      decoder sees proj(x); a regression predictor replaces the flow
enum class VarianceMode { flow, reversed, mse };

/// Rate at which variance is modeled.
enum class Granularity { frame, phoneme };

std::string_view to_string(VarianceMode m);
std::string_view to_string(Granularity g);
VarianceMode parse_variance_mode(std::string_view s);
Granularity parse_granularity(std::string_view s);

struct ModelConfig {
  std::size_t vocab_size = 16;
  std::size_t d_model = 32;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;
  std::size_t heads = 2;
  std::size_t ff_hidden = 64;
  std::size_t kernel = 3;
  double dropout = 0.1;
  std::size_t predictor_hidden = 32;
  std::size_t predictor_kernel = 3;
  std::size_t n_mels = 80;
  VarianceMode mode = VarianceMode::flow;
  Granularity granularity = Granularity::frame;
  std::size_t flow_layers = 4;
  std::size_t flow_hidden = 32;
  std::size_t flow_kernel = 3;
  std::size_t spline_bins = 10;
  double spline_bound = 5.0;

  flows::FlowConfig flow_config() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

}  // namespace varflow::model
