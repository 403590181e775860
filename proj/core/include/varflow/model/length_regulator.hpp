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
#include <span>
#include <vector>

#include "varflow/numerics/tensor.hpp"

namespace varflow::model {

/// Phoneme row feeding each frame. Frames past sum(durations) up to `frames`
/// map to row 0 and are expected to be masked by the caller.
std::vector<std::size_t> frame_to_phoneme(std::span<const int> durations, std::size_t frames);

/// Repeats row i of h durations[i] times. Output has max(frames, sum) rows;
/// trailing padding rows are zero. Negative durations throw DataError.
num::Tensor length_regulate(const num::Tensor& h, std::span<const int> durations, std::size_t frames = 0);

/// round-half-up of exp(log_duration), at least 1.
int duration_from_log(double log_duration);

}  // namespace varflow::model
