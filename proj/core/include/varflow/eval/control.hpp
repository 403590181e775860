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
#include <span>
#include <string>
#include <vector>

#include "varflow/model/acoustic_model.hpp"

namespace varflow::eval {

enum class PitchDomain { hz, log, standardized };

/// Semitone shift: Hz values scale by 2^(lambda/12), log values move by
/// lambda*ln2/12, standardized log values by that amount over `log_std`.
std::vector<double> shift_pitch(std::span<const double> x, double lambda, PitchDomain domain, double log_std = 1.0);

struct ControlResult {
  model::SynthesisResult synthesis;
  std::string mode;            // variance mode that consumed the edit
  double latent_change = 0.0;  // max |z' - z| on the pitch track (flow modes)
};

struct ControlExtras {
  /// Multiplier on raw (destandardized) energy; 1 leaves energy alone.
  double energy_scale = 1.0;
  /// Push unchanged tracks through the flow again instead of keeping their z.
  bool reencode_unchanged = false;
};

/// Samples pitch, shifts it by lambda semitones and hands it back to the
/// decoder through the model's own wiring: re-encoded by the flow in flow
/// mode, fed directly otherwise.
ControlResult controlled_synthesize(const model::AcousticModel& model, std::span<const int> phonemes, double lambda,
                                    double sigma, std::uint64_t seed, const ControlExtras& extras = {});

}  // namespace varflow::eval
