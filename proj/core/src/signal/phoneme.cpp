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

#include "varflow/signal/phoneme.hpp"

#include <numeric>
#include <string>

#include "varflow/errors.hpp"

namespace varflow::signal {
namespace {

void check_durations(std::span<const int> durations, std::size_t frames) {
  long total = 0;
  for (int d : durations) {
    if (d < 0) throw DataError("negative phoneme duration");
    total += d;
  }
  if (total != static_cast<long>(frames)) {
    throw DataError("durations sum to " + std::to_string(total) + " but there are " + std::to_string(frames) +
                    " frames");
  }
}

}  // namespace

std::vector<double> phoneme_average(std::span<const double> values, std::span<const int> durations) {
  check_durations(durations, values.size());
  std::vector<double> out(durations.size(), 0.0);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    const auto d = static_cast<std::size_t>(durations[i]);
    if (d > 0) {
      out[i] = std::accumulate(values.begin() + static_cast<long>(pos), values.begin() + static_cast<long>(pos + d), 0.0) /
               static_cast<double>(d);
    }
    pos += d;
  }
  return out;
}

std::vector<double> expand_by_durations(std::span<const double> values, std::span<const int> durations) {
  if (values.size() != durations.size()) throw DataError("values and durations differ in length");
  std::vector<double> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (durations[i] < 0) throw DataError("negative phoneme duration");
    out.insert(out.end(), static_cast<std::size_t>(durations[i]), values[i]);
  }
  return out;
}

}  // namespace varflow::signal
