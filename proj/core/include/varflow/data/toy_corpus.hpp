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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "varflow/data/manifest.hpp"
#include "varflow/signal/spectral.hpp"

namespace varflow::data {

struct ToySymbol {
  double base_f0 = 220.0;
  double amplitude = 0.5;
  std::array<double, 3> harmonics{1.0, 0.5, 0.25};
};

/// Synthetic corpus of harmonic tones, one tone per phoneme symbol.
struct ToyCorpusSpec {
  std::size_t vocab_size = 8;
  std::size_t utterances = 64;
  std::size_t min_phonemes = 4;
  std::size_t max_phonemes = 8;
  int min_duration = 3;   // frames
  int max_duration = 10;
  double f0_low = 110.0;  // symbol base f0 range (Hz)
  double f0_high = 330.0;
  double utterance_jitter = 0.15;  // f0 scale drawn from [1 - j, 1 + j]
  double phoneme_jitter = 0.02;
  double gain_jitter = 0.2;
  int sample_rate = 16000;
  std::size_t hop_length = 256;
  std::uint64_t seed = 7;

  void validate() const;
  /// Symbol table derived from the spec (bases spread log-uniformly).
  std::vector<ToySymbol> symbols() const;
  nlohmann::json to_json() const;
  static ToyCorpusSpec from_json(const nlohmann::json& j);
};

struct ToyUtterance {
  ManifestEntry entry;
  signal::Waveform audio;
  std::vector<double> phoneme_f0;  // true f0 per phoneme (Hz)
};

/// Each utterance has hop * sum(durations) - 1 samples so centered framing
/// yields exactly sum(durations) frames.
std::vector<ToyUtterance> generate_toy_corpus(const ToyCorpusSpec& spec);

/// Writes <dir>/wav/<id>.wav and <dir>/manifest.jsonl; returns the manifest path.
std::string write_toy_corpus(const ToyCorpusSpec& spec, const std::string& dir);

}  // namespace varflow::data
