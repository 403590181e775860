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

#include <span>

#include "varflow/model/acoustic_model.hpp"

namespace varflow::training {

/// Batch objective. Component values are masked sums over the batch divided
/// by the batch's real counts; total = melspec + duration + alpha * (pitch + energy)
/// evaluated term by term in that order.
struct LossBreakdown {
  num::Tensor objective;  // differentiable total
  double melspec = 0.0;
  double duration = 0.0;
  double pitch = 0.0;
  double energy = 0.0;
  double total = 0.0;
  double alpha = 0.0;
};

/// Throws NumericalError naming the first non-finite component.
LossBreakdown total_loss(std::span<const model::LossTerms> terms, double alpha);

}  // namespace varflow::training
