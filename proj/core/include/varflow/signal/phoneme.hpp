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
#include <vector>

namespace varflow::signal {

/// Mean over each phoneme's frame span; zero-duration phonemes get 0.
/// Throws DataError when durations do not sum to values.size().
std::vector<double> phoneme_average(std::span<const double> values, std::span<const int> durations);

/// Repeats each value durations[i] times.
std::vector<double> expand_by_durations(std::span<const double> values, std::span<const int> durations);

}  // namespace varflow::signal
