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

#include "varflow/model/normalization.hpp"

#include "varflow/errors.hpp"

namespace varflow::model {

nlohmann::json NormalizationStats::to_json() const {
  return {{"pitch_mean", pitch_mean}, {"pitch_std", pitch_std},   {"energy_mean", energy_mean},
          {"energy_std", energy_std}, {"mel_mean", mel_mean},     {"mel_std", mel_std}};
}

NormalizationStats NormalizationStats::from_json(const nlohmann::json& j) {
  NormalizationStats s;
  try {
    s.pitch_mean = j.at("pitch_mean").get<double>();
    s.pitch_std = j.at("pitch_std").get<double>();
    s.energy_mean = j.at("energy_mean").get<double>();
    s.energy_std = j.at("energy_std").get<double>();
    s.mel_mean = j.at("mel_mean").get<std::vector<double>>();
    s.mel_std = j.at("mel_std").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed normalization stats: ") + e.what());
  }
  if (!(s.pitch_std > 0.0) || !(s.energy_std > 0.0) || !(s.mel_std > 0.0)) {
    throw DataError("normalization stats have a non-positive standard deviation");
  }
  return s;
}

}  // namespace varflow::model
