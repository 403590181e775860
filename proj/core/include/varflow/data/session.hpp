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

#include <string>
#include <vector>

#include "varflow/data/run_config.hpp"
#include "varflow/model/acoustic_model.hpp"
#include "varflow/training/checkpoint.hpp"

namespace varflow::data {

struct TrainedModel {
  RunConfig config;
  model::AcousticModel model;
  std::int64_t step = 0;
};

/// Rebuilds the model recorded in a checkpoint. DataError when the checkpoint
/// has no run configuration or its arrays do not fit that configuration.
TrainedModel load_trained_model(const std::string& checkpoint_path);

struct TrainingSet {
  model::NormalizationStats stats;
  std::vector<model::TrainingExample> examples;
  std::vector<std::string> ids;
  std::vector<std::string> skipped;  // utterances without voiced frames
};

/// Reads a prepared cache directory (features plus stats.json) and checks it
/// against the run configuration.
TrainingSet load_training_set(const std::string& cache_dir, const RunConfig& config);

}  // namespace varflow::data
