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

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "varflow/data/toy_corpus.hpp"
#include "varflow/model/config.hpp"
#include "varflow/signal/spectral.hpp"
#include "varflow/training/trainer.hpp"

namespace varflow::data {

struct InferenceConfig {
  double sigma = 0.333;
  int griffin_lim_iters = 32;
};

/// Everything a run needs. Sections signal, model, train and inference are
/// mandatory with every field present; corpus is only needed to generate
/// toy data.
struct RunConfig {
  signal::SignalConfig signal;
  model::ModelConfig model;
  training::TrainConfig train;
  InferenceConfig inference;
  std::optional<ToyCorpusSpec> corpus;

  nlohmann::json to_json() const;
  /// Rejects unknown and missing keys, naming the dotted path.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  void validate() const;

  /// Canonical text (sorted keys) used for hashing and checkpoints.
  std::string canonical() const;
};

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

}  // namespace varflow::data
