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

#include "varflow/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "varflow/errors.hpp"

namespace varflow::training {

void TrainConfig::validate() const {
  auto need = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(std::string("train.") + field + " " + what);
  };
  need(alpha >= 0.0, "alpha", "must be non-negative");
  need(batch_size > 0, "batch_size", "must be positive");
  need(max_steps > 0, "max_steps", "must be positive");
  need(warmup_steps > 0, "warmup_steps", "must be positive");
  need(lr_scale > 0.0, "lr_scale", "must be positive");
  need(beta1 >= 0.0 && beta1 < 1.0, "beta1", "must be in [0, 1)");
  need(beta2 >= 0.0 && beta2 < 1.0, "beta2", "must be in [0, 1)");
  need(adam_eps > 0.0, "adam_eps", "must be positive");
  need(weight_decay >= 0.0, "weight_decay", "must be non-negative");
  need(grad_clip > 0.0, "grad_clip", "must be positive");
  need(checkpoint_every > 0, "checkpoint_every", "must be positive");
}

nlohmann::json StepRecord::to_json() const {
  return {{"step", step},
          {"lr", lr},
          {"melspec", loss.melspec},
          {"duration", loss.duration},
          {"pitch", loss.pitch},
          {"energy", loss.energy},
          {"total", loss.total},
          {"alpha", loss.alpha},
          {"grad_norm", grad_norm}};
}

Trainer::Trainer(model::AcousticModel& model, TrainConfig config, std::vector<model::TrainingExample> data)
    : model_(model), config_(config), data_(std::move(data)), optimizer_(model.parameters(), config.adam()) {
  config_.validate();
  if (data_.empty()) throw DataError("training set is empty");
  for (const auto& ex : data_) ex.validate(model_.config().n_mels);
}

std::vector<std::size_t> Trainer::batch_indices(std::int64_t step) const {
  const std::size_t n = data_.size();
  const std::size_t b = config_.batch_size;
  std::vector<std::size_t> out;
  std::int64_t cached_epoch = -1;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < b; ++i) {
    const std::uint64_t g = static_cast<std::uint64_t>(step - 1) * b + i;
    const auto epoch = static_cast<std::int64_t>(g / n);
    if (epoch != cached_epoch) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      num::Rng rng(config_.seed * 0x2545F4914F6CDD1DULL + static_cast<std::uint64_t>(epoch));
      for (std::size_t k = n; k > 1; --k) {
        std::uniform_int_distribution<std::size_t> pick(0, k - 1);
        std::swap(perm[k - 1], perm[pick(rng)]);
      }
      cached_epoch = epoch;
    }
    out.push_back(perm[g % n]);
  }
  return out;
}

StepRecord Trainer::step() {
  const std::int64_t s = step_ + 1;
  num::Rng dropout_rng(config_.seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(s)));
  model::ForwardContext ctx;
  ctx.encoder_dropout = model_.config().dropout;
  ctx.decoder_dropout = model_.config().dropout;
  ctx.rng = &dropout_rng;

  std::vector<model::LossTerms> terms;
  for (std::size_t idx : batch_indices(s)) terms.push_back(model_.loss_terms(data_[idx], ctx));

  StepRecord rec;
  rec.step = s;
  rec.loss = total_loss(terms, config_.alpha);
  model_.parameters().zero_grad();
  num::backward(rec.loss.objective);
  rec.grad_norm = clip_grad_norm(model_.parameters(), config_.grad_clip);
  if (!std::isfinite(rec.grad_norm)) {
    throw NumericalError("training diverged: gradient norm is not finite at step " + std::to_string(s));
  }
  rec.lr = noam_lr(s, model_.config().d_model, config_.warmup_steps, config_.lr_scale);
  optimizer_.step(model_.parameters(), rec.lr);
  model_.parameters().zero_grad();
  rec.loss.objective = num::Tensor();
  step_ = s;
  return rec;
}

Checkpoint Trainer::checkpoint(const std::string& config_json) const {
  return capture(model_, &optimizer_, step_, config_json);
}

void Trainer::resume(const Checkpoint& ck) {
  restore(ck, model_, &optimizer_);
  step_ = ck.step;
}

void Trainer::run(std::ostream* metrics, const std::string& checkpoint_path, const std::string& config_json,
                  const std::function<void(const StepRecord&)>& on_step) {
  while (step_ < config_.max_steps) {
    const StepRecord rec = step();
    if (metrics != nullptr) *metrics << rec.to_json().dump() << '\n';
    if (on_step) on_step(rec);
    if (!checkpoint_path.empty() && (step_ % config_.checkpoint_every == 0 || step_ == config_.max_steps)) {
      if (metrics != nullptr) metrics->flush();
      save_checkpoint(checkpoint_path, checkpoint(config_json));
    }
  }
  if (metrics != nullptr) metrics->flush();
}

}  // namespace varflow::training
