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

#include "varflow/training/loss.hpp"

#include <cmath>
#include <string>

#include "varflow/errors.hpp"
#include "varflow/numerics/ops.hpp"

namespace varflow::training {

namespace {

num::Tensor component(std::span<const model::LossTerms> terms, num::Tensor model::LossTerms::*sum,
                      std::size_t model::LossTerms::*count) {
  std::size_t n = 0;
  num::Tensor acc;
  for (const auto& t : terms) {
    n += t.*count;
    if ((t.*sum).defined()) acc = acc.defined() ? num::add(acc, t.*sum) : t.*sum;
  }
  if (n == 0 || !acc.defined()) return num::Tensor::scalar(0.0);
  return num::scale(acc, 1.0 / static_cast<double>(n));
}

}  // namespace

LossBreakdown total_loss(std::span<const model::LossTerms> terms, double alpha) {
  using model::LossTerms;
  const num::Tensor mel = component(terms, &LossTerms::melspec, &LossTerms::melspec_count);
  const num::Tensor dur = component(terms, &LossTerms::duration, &LossTerms::duration_count);
  const num::Tensor pitch = component(terms, &LossTerms::pitch, &LossTerms::pitch_count);
  const num::Tensor energy = component(terms, &LossTerms::energy, &LossTerms::energy_count);

  LossBreakdown b;
  b.alpha = alpha;
  b.melspec = mel.item();
  b.duration = dur.item();
  b.pitch = pitch.item();
  b.energy = energy.item();
  const std::pair<const char*, double> named[] = {
      {"melspec", b.melspec}, {"duration", b.duration}, {"pitch", b.pitch}, {"energy", b.energy}};
  for (const auto& [name, v] : named) {
    if (!std::isfinite(v)) throw NumericalError(std::string("training diverged: ") + name + " loss is not finite");
  }
  b.objective = num::add(num::add(num::add(mel, dur), num::scale(pitch, alpha)), num::scale(energy, alpha));
  b.total = b.objective.item();
  return b;
}

}  // namespace varflow::training
