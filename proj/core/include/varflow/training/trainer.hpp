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
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "varflow/model/acoustic_model.hpp"
#include "varflow/training/checkpoint.hpp"
#include "varflow/training/loss.hpp"
#include "varflow/training/optimizer.hpp"

namespace varflow::training {

struct TrainConfig {
  double alpha = 0.1;
  std::size_t batch_size = 16;
  std::int64_t max_steps = 230000;
  std::int64_t warmup_steps = 400;
  double lr_scale = 0.113;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-9;
  double weight_decay = 0.01;
  double grad_clip = 1.0;
  std::int64_t checkpoint_every = 1000;

  AdamWConfig adam() const { return {beta1, beta2, adam_eps, weight_decay}; }
  void validate() const;
};

struct StepRecord {
  std::int64_t step = 0;
  double lr = 0.0;
  double grad_norm = 0.0;
  LossBreakdown loss;

  nlohmann::json to_json() const;
};

/// Owns the optimizer and the step counter. Batches and dropout masks are
/// pure functions of (seed, step), so a restored trainer replays exactly.
class Trainer {
 public:
  Trainer(model::AcousticModel& model, TrainConfig config, std::vector<model::TrainingExample> data);

  StepRecord step();
  std::int64_t steps_done() const { return step_; }
  const TrainConfig& config() const { return config_; }
  AdamW& optimizer() { return optimizer_; }

  /// Example indices used at a given (1-based) step.
  std::vector<std::size_t> batch_indices(std::int64_t step) const;

  Checkpoint checkpoint(const std::string& config_json) const;
  void resume(const Checkpoint& ck);

  /// Runs until max_steps. Each record goes to `metrics` as one JSON line;
  /// when checkpoint_path is set a checkpoint is written every
  /// checkpoint_every steps and at the end.
  void run(std::ostream* metrics, const std::string& checkpoint_path, const std::string& config_json,
           const std::function<void(const StepRecord&)>& on_step = {});

 private:
  model::AcousticModel& model_;
  TrainConfig config_;
  std::vector<model::TrainingExample> data_;
  AdamW optimizer_;
  std::int64_t step_ = 0;
};

}  // namespace varflow::training
