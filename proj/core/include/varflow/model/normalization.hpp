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

#include <nlohmann/json.hpp>

namespace varflow::model {

/// Corpus statistics used to standardize model targets. Pitch statistics are
/// over voiced log-f0 frames, energy over all real frames, mel per band with
/// one shared scale.
struct NormalizationStats {
  double pitch_mean = 0.0;
  double pitch_std = 1.0;
  double energy_mean = 0.0;
  double energy_std = 1.0;
  std::vector<double> mel_mean;
  double mel_std = 1.0;

  bool initialized() const { return !mel_mean.empty(); }

  double standardize_pitch(double log_f0) const { return (log_f0 - pitch_mean) / pitch_std; }
  double pitch_to_log(double x) const { return x * pitch_std + pitch_mean; }
  double standardize_energy(double e) const { return (e - energy_mean) / energy_std; }
  double energy_from(double x) const { return x * energy_std + energy_mean; }

  nlohmann::json to_json() const;
  static NormalizationStats from_json(const nlohmann::json& j);
};

}  // namespace varflow::model
