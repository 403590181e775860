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

#include "varflow/model/length_regulator.hpp"

#include <algorithm>
#include <cmath>

#include "varflow/errors.hpp"
#include "varflow/numerics/ops.hpp"

namespace varflow::model {

std::vector<std::size_t> frame_to_phoneme(std::span<const int> durations, std::size_t frames) {
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    if (durations[i] < 0) throw DataError("negative duration");
    index.insert(index.end(), static_cast<std::size_t>(durations[i]), i);
  }
  if (index.size() < frames) index.resize(frames, 0);
  return index;
}

num::Tensor length_regulate(const num::Tensor& h, std::span<const int> durations, std::size_t frames) {
  if (durations.size() != h.rows()) throw DataError("durations and hidden rows differ in length");
  const std::vector<std::size_t> index = frame_to_phoneme(durations, frames);
  long total = 0;
  for (int d : durations) total += d;
  num::Tensor out = num::gather_rows(h, index);
  if (index.size() == static_cast<std::size_t>(total)) return out;
  std::vector<std::uint8_t> mask(index.size(), 0);
  std::fill(mask.begin(), mask.begin() + total, 1);
  return num::mul(out, num::mask_column(mask));
}

int duration_from_log(double log_duration) {
  const double d = std::floor(std::exp(log_duration) + 0.5);
  if (!(d >= 1.0)) return 1;
  return d > 1e6 ? 1000000 : static_cast<int>(d);
}

}  // namespace varflow::model
