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

#include "varflow/eval/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace varflow::eval {

std::vector<double> shift_pitch(std::span<const double> x, double lambda, PitchDomain domain, double log_std) {
  std::vector<double> out(x.begin(), x.end());
  if (domain == PitchDomain::hz) {
    const double factor = std::exp2(lambda / 12.0);
    for (double& v : out) v *= factor;
    return out;
  }
  double offset = lambda * std::numbers::ln2 / 12.0;
  if (domain == PitchDomain::standardized) offset /= log_std;
  for (double& v : out) v += offset;
  return out;
}

ControlResult controlled_synthesize(const model::AcousticModel& model, std::span<const int> phonemes, double lambda,
                                    double sigma, std::uint64_t seed, const ControlExtras& extras) {
  const auto& stats = model.stats();
  const double log_std = stats.pitch_std;
  model::SynthesisOptions opt;
  opt.sigma = sigma;
  opt.seed = seed;
  opt.reencode_unchanged = extras.reencode_unchanged;
  opt.edit = [&](std::vector<double>& pitch, std::vector<double>& energy) {
    if (lambda != 0.0) pitch = shift_pitch(pitch, lambda, PitchDomain::standardized, log_std);
    if (extras.energy_scale != 1.0) {
      for (double& e : energy) {
        e = stats.standardize_energy(extras.energy_scale * stats.energy_from(e));
      }
    }
  };
  ControlResult r;
  r.synthesis = model.synthesize(phonemes, opt);
  r.mode = std::string(model::to_string(model.config().mode));
  const auto& z = r.synthesis.pitch.z;
  const auto& z2 = r.synthesis.pitch_used.z;
  for (std::size_t i = 0; i < std::min(z.size(), z2.size()); ++i) {
    r.latent_change = std::max(r.latent_change, std::abs(z2[i] - z[i]));
  }
  return r;
}

}  // namespace varflow::eval
