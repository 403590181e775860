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

#include "varflow/data/session.hpp"

#include <filesystem>

#include <nlohmann/json.hpp>

#include "varflow/data/prepare.hpp"
#include "varflow/errors.hpp"

namespace varflow::data {

TrainedModel load_trained_model(const std::string& checkpoint_path) {
  const auto ck = training::load_checkpoint(checkpoint_path);
  if (ck.config_json.empty()) throw DataError(checkpoint_path + ": checkpoint carries no run configuration");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ck.config_json);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(checkpoint_path + ": unreadable run configuration: " + e.what());
  }
  RunConfig config = RunConfig::from_json(j);
  config.validate();
  if (!ck.stats.initialized()) throw DataError(checkpoint_path + ": checkpoint has no normalization statistics");
  model::AcousticModel m(config.model, config.train.seed);
  training::restore(ck, m, nullptr);
  return {std::move(config), std::move(m), ck.step};
}

TrainingSet load_training_set(const std::string& cache_dir, const RunConfig& config) {
  TrainingSet set;
  set.stats = load_stats((std::filesystem::path(cache_dir) / "stats.json").string());
  if (set.stats.mel_mean.size() != config.model.n_mels) {
    throw ConfigError("feature cache has " + std::to_string(set.stats.mel_mean.size()) +
                      " mel bands but model.n_mels is " + std::to_string(config.model.n_mels));
  }
  for (const auto& f : load_cache_dir(cache_dir)) {
    if (f.sample_rate != config.signal.sample_rate || f.hop_length != config.signal.hop_length) {
      throw ConfigError("feature cache for '" + f.id + "' was extracted at " + std::to_string(f.sample_rate) +
                        " Hz / hop " + std::to_string(f.hop_length) + ", config says " +
                        std::to_string(config.signal.sample_rate) + " Hz / hop " +
                        std::to_string(config.signal.hop_length));
    }
    for (int id : f.phonemes) {
      if (id < 0 || static_cast<std::size_t>(id) >= config.model.vocab_size) {
        throw ConfigError("utterance '" + f.id + "' uses phoneme id " + std::to_string(id) +
                          " outside model.vocab_size");
      }
    }
    auto ex = model::make_example(f, set.stats);
    if (!ex) {
      set.skipped.push_back(f.id);
      continue;
    }
    set.examples.push_back(std::move(*ex));
    set.ids.push_back(f.id);
  }
  if (set.examples.empty()) throw DataError("no usable utterances in " + cache_dir);
  return set;
}

}  // namespace varflow::data
