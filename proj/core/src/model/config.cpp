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

#include "varflow/model/config.hpp"

#include <string>

#include "varflow/errors.hpp"

namespace varflow::model {

std::string_view to_string(VarianceMode m) {
  switch (m) {
    case VarianceMode::flow: return "flow";
    case VarianceMode::reversed: return "reversed";
    case VarianceMode::mse: return "mse";
  }
  return "?";
}

std::string_view to_string(Granularity g) { return g == Granularity::frame ? "frame" : "phoneme"; }

VarianceMode parse_variance_mode(std::string_view s) {
  if (s == "flow") return VarianceMode::flow;
  if (s == "reversed") return VarianceMode::reversed;
  if (s == "mse") return VarianceMode::mse;
  throw ConfigError("unknown variance mode '" + std::string(s) + "' (expected flow, reversed or mse)");
}

Granularity parse_granularity(std::string_view s) {
  if (s == "frame") return Granularity::frame;
  if (s == "phoneme") return Granularity::phoneme;
  throw ConfigError("unknown granularity '" + std::string(s) + "' (expected frame or phoneme)");
}

flows::FlowConfig ModelConfig::flow_config() const {
  flows::FlowConfig f;
  f.layers = static_cast<int>(flow_layers);
  f.condition_channels = d_model;
  f.hidden = flow_hidden;
  f.kernel = flow_kernel;
  f.spline.bins = static_cast<int>(spline_bins);
  f.spline.bound = spline_bound;
  return f;
}

void ModelConfig::validate() const {
  auto need = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(std::string("model.") + field + " " + what);
  };
  need(vocab_size > 0, "vocab_size", "must be positive");
  need(d_model > 0, "d_model", "must be positive");
  need(heads > 0 && d_model % heads == 0, "heads", "must divide d_model");
  need(ff_hidden > 0, "ff_hidden", "must be positive");
  need(kernel % 2 == 1, "kernel", "must be odd");
  need(predictor_kernel % 2 == 1, "predictor_kernel", "must be odd");
  need(flow_kernel % 2 == 1, "flow_kernel", "must be odd");
  need(predictor_hidden > 0, "predictor_hidden", "must be positive");
  need(dropout >= 0.0 && dropout < 1.0, "dropout", "must be in [0, 1)");
  need(n_mels > 0, "n_mels", "must be positive");
  need(flow_hidden > 0, "flow_hidden", "must be positive");
  need(spline_bins >= 2, "spline_bins", "must be at least 2");
  need(spline_bound > 0.0, "spline_bound", "must be positive");
}

}  // namespace varflow::model
