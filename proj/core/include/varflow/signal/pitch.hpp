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
#include <optional>
#include <span>
#include <vector>

#include "varflow/signal/spectral.hpp"

namespace varflow::signal {

struct PitchContour {
  std::vector<double> f0;           // Hz, 0 where unvoiced
  std::vector<std::uint8_t> voiced;

  std::size_t size() const { return f0.size(); }
  static PitchContour from_hz(std::vector<double> f0);
};

/// Normalized autocorrelation per frame (same framing as the STFT) searched
/// over lags [rate / f0_max, rate / f0_min]. The smallest-lag peak within 90%
/// of the best one is refined by parabolic interpolation; the frame is voiced
/// when that peak reaches voicing_threshold.
PitchContour estimate_f0(const Waveform& w, const SignalConfig& config);

/// Linear interpolation across unvoiced gaps (edges held), then natural log.
/// nullopt when no frame is voiced.
std::optional<std::vector<double>> fill_and_log_pitch(const PitchContour& p);

}  // namespace varflow::signal
