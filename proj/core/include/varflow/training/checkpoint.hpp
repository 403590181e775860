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
#include "varflow/training/optimizer.hpp"

namespace varflow::training {

inline constexpr std::uint8_t kCheckpointVersion = 1;

struct NamedArray {
  std::string name;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> values;
};

/// Everything needed to rebuild a model and continue training.
struct Checkpoint {
  std::string config_json;  // run configuration, recorded verbatim
  model::NormalizationStats stats;
  std::int64_t step = 0;
  std::vector<NamedArray> parameters;
  bool has_optimizer = false;
  std::int64_t optimizer_steps = 0;
  std::vector<NamedArray> first_moments;
  std::vector<NamedArray> second_moments;
};

Checkpoint capture(const model::AcousticModel& model, const AdamW* optimizer, std::int64_t step,
                   std::string config_json);

/// Copies parameters (and optimizer state when given) back. Throws DataError
/// when names or shapes disagree with the model.
void restore(const Checkpoint& ck, model::AcousticModel& model, AdamW* optimizer);

/// "VFCK", version byte, then named entries: u32-prefixed name, kind byte
/// (0 f64 array with u32 rows/cols, 1 i64 scalar, 2 byte string), payload.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

/// Written to a temporary file first so an existing checkpoint survives a
/// failed write.
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace varflow::training
