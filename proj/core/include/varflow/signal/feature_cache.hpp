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

#include "varflow/numerics/matrix.hpp"

namespace varflow::signal {

/// Per-utterance bundle written to the feature cache.
struct UtteranceFeatures {
  std::string id;
  std::vector<int> phonemes;
  std::vector<int> durations;
  num::Matrix mel;                   // T x n_mels
  std::vector<double> f0;            // Hz
  std::vector<std::uint8_t> voiced;
  std::vector<double> energy;
  int sample_rate = 22050;
  std::uint32_t hop_length = 256;

  std::size_t frames() const { return mel.rows(); }
  /// Throws DataError when the arrays disagree on T or N.
  void validate() const;
};

inline constexpr std::uint8_t kFeatureCacheVersion = 1;

/// "VFFC", version byte, u32 header (T, n_mels, n_phonemes, sample_rate, hop),
/// then little-endian mel f64[T*n_mels], f0 f64[T], voiced u8[T],
/// energy f64[T], durations i32[N], phoneme ids i32[N].
std::vector<std::uint8_t> encode_features(const UtteranceFeatures& f);
UtteranceFeatures decode_features(std::span<const std::uint8_t> bytes, std::string id = {});

void write_feature_cache(const std::string& path, const UtteranceFeatures& f);
UtteranceFeatures read_feature_cache(const std::string& path);

}  // namespace varflow::signal
