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

#include "varflow/eval/ffe.hpp"

#include <cmath>
#include <string>

#include "varflow/errors.hpp"

namespace varflow::eval {

FfeReport& FfeReport::operator+=(const FfeReport& other) {
  voicing_error_frames += other.voicing_error_frames;
  gross_pitch_error_frames += other.gross_pitch_error_frames;
  total_frames += other.total_frames;
  ffe_percent = total_frames == 0 ? 0.0
                                  : 100.0 * static_cast<double>(voicing_error_frames + gross_pitch_error_frames) /
                                        static_cast<double>(total_frames);
  return *this;
}

FfeReport compute_ffe(const signal::PitchContour& ref, const signal::PitchContour& est) {
  if (ref.size() != est.size() || ref.voiced.size() != ref.size() || est.voiced.size() != est.size()) {
    throw DataError("FFE contours differ in length (" + std::to_string(ref.size()) + " vs " +
                    std::to_string(est.size()) + ")");
  }
  FfeReport r;
  for (std::size_t t = 0; t < ref.size(); ++t) {
    const bool rv = ref.voiced[t] != 0, ev = est.voiced[t] != 0;
    if (rv != ev) {
      ++r.voicing_error_frames;
    } else if (rv && std::abs(est.f0[t] - ref.f0[t]) > kGrossPitchThreshold * ref.f0[t]) {
      ++r.gross_pitch_error_frames;
    }
  }
  r.total_frames = ref.size();
  r += FfeReport{};
  return r;
}

}  // namespace varflow::eval
