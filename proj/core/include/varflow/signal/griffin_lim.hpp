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

#include "varflow/signal/spectral.hpp"

namespace varflow::signal {

/// Phase reconstruction from a log-mel spectrogram: mel pseudo-inverse to a
/// linear magnitude, random initial phase, then `iterations` rounds of
/// STFT/ISTFT projection. Zero iterations returns the random-phase inverse.
Waveform griffin_lim(const MelSpectrogram& mel, const SignalConfig& config, int iterations,
                     std::uint64_t seed = 0);

/// Mean absolute difference between two log-mel matrices of equal shape.
double mean_abs_log_error(const num::Matrix& a, const num::Matrix& b);

}  // namespace varflow::signal
