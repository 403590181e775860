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

#include "varflow/eval/mel_pitch.hpp"

#include <algorithm>
#include <cmath>

#include "varflow/errors.hpp"

namespace varflow::eval {

signal::PitchContour estimate_f0_from_mel(const num::Matrix& log_mel, const signal::SignalConfig& config,
                                          const MelPitchOptions& options) {
  if (log_mel.cols() != config.n_mels) throw DataError("mel band count does not match the configuration");
  const signal::MelFilterbank fb(config);
  const std::vector<double>& centers = fb.centers();
  std::size_t lo = centers.size(), hi = 0;
  for (std::size_t m = 0; m < centers.size(); ++m) {
    if (centers[m] >= options.f0_min && centers[m] <= options.f0_max) {
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  }
  if (lo > hi) throw ConfigError("no mel band centre lies inside the f0 search range");

  signal::PitchContour p;
  p.f0.assign(log_mel.rows(), 0.0);
  p.voiced.assign(log_mel.rows(), 0);
  for (std::size_t t = 0; t < log_mel.rows(); ++t) {
    const auto row = log_mel.row(t);
    std::size_t peak = lo;
    for (std::size_t m = lo; m <= hi; ++m) {
      if (row[m] > row[peak]) peak = m;
    }
    if (row[peak] < options.voicing_floor) continue;
    const std::size_t a = peak > 0 ? peak - 1 : peak;
    const std::size_t b = std::min(peak + 1, centers.size() - 1);
    double num = 0.0, den = 0.0;
    for (std::size_t m = a; m <= b; ++m) {
      const double w = std::exp(row[m] - row[peak]);
      num += w * centers[m];
      den += w;
    }
    p.f0[t] = num / den;
    p.voiced[t] = 1;
  }
  return p;
}

double dominant_frequency(const signal::PitchContour& p) {
  std::vector<double> v;
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (p.voiced[t]) v.push_back(p.f0[t]);
  }
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace varflow::eval
