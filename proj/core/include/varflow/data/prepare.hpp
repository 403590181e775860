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

#include <string>
#include <utility>
#include <vector>

#include "varflow/model/normalization.hpp"
#include "varflow/signal/feature_cache.hpp"
#include "varflow/signal/spectral.hpp"

namespace varflow::data {

struct PrepareReport {
  std::vector<std::string> accepted;
  std::vector<std::pair<std::string, std::string>> rejected;  // id, reason
  model::NormalizationStats stats;
};

/// Feature extraction for one waveform; durations and ids are attached as given.
signal::UtteranceFeatures extract_features(const signal::Waveform& w, const signal::SignalConfig& config,
                                           std::vector<int> phonemes, std::vector<int> durations, std::string id);

/// Corpus statistics: pitch over voiced log-f0, energy over all frames,
/// mel per band with one pooled scale.
model::NormalizationStats compute_stats(const std::vector<signal::UtteranceFeatures>& corpus);

/// Extracts features for every manifest entry (in parallel), writes
/// <out_dir>/<id>.vffc plus <out_dir>/stats.json. Utterances whose durations
/// disagree with the frame count, or that have no voiced frame, are rejected
/// with a reason.
PrepareReport prepare(const std::string& manifest_path, const signal::SignalConfig& config, const std::string& out_dir,
                      unsigned threads = 0);

/// Cache files in <dir>, ordered by id.
std::vector<signal::UtteranceFeatures> load_cache_dir(const std::string& dir);
model::NormalizationStats load_stats(const std::string& path);

}  // namespace varflow::data
