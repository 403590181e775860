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

#include "varflow/numerics/matrix.hpp"
#include "varflow/signal/pitch.hpp"
#include "varflow/signal/spectral.hpp"

namespace varflow::eval {

struct MelPitchOptions {
  double f0_min = 60.0;
  double f0_max = 800.0;
  /// Frames whose strongest in-range band is below this log-magnitude are
  /// unvoiced.
  double voicing_floor = 0.0;
};

/// f0 read straight off a log-mel spectrogram: the strongest band whose
/// center lies in [f0_min, f0_max], refined by a magnitude-weighted centroid
/// of that band and its two neighbours.
signal::PitchContour estimate_f0_from_mel(const num::Matrix& log_mel, const signal::SignalConfig& config,
                                          const MelPitchOptions& options = {});

/// Median of the voiced f0 values, 0 when none are voiced.
double dominant_frequency(const signal::PitchContour& p);

}  // namespace varflow::eval
