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

#include "varflow/signal/pitch.hpp"

namespace varflow::eval {

inline constexpr double kGrossPitchThreshold = 0.2;

struct FfeReport {
  double ffe_percent = 0.0;
  std::size_t voicing_error_frames = 0;
  std::size_t gross_pitch_error_frames = 0;
  std::size_t total_frames = 0;

  FfeReport& operator+=(const FfeReport& other);
};

/// A frame is wrong when the voicing decisions differ, or when both are
/// voiced and |est - ref| / ref exceeds 20%. Throws DataError on length
/// mismatch.
FfeReport compute_ffe(const signal::PitchContour& ref, const signal::PitchContour& est);

}  // namespace varflow::eval
