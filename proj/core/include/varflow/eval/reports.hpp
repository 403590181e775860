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

#include <nlohmann/json.hpp>

#include "varflow/eval/ffe.hpp"
#include "varflow/eval/mel_pitch.hpp"
#include "varflow/model/acoustic_model.hpp"

namespace varflow::eval {

struct ResponsivenessRow {
  double lambda = 0.0;
  FfeReport ffe;
  double expected_ratio = 1.0;  // 2^(lambda/12)
  double measured_ratio = 1.0;  // geometric mean over utterances of dominant(lambda) / dominant(0)
};

struct ResponsivenessReport {
  std::string model_label;
  std::vector<ResponsivenessRow> rows;  // requested lambdas in order, then lambda = 0
  const ResponsivenessRow& at(double lambda) const;

  /// One header line and one row for this model, columns per lambda.
  std::string table() const;
  nlohmann::json to_json() const;
};

inline const std::vector<double> kDefaultShiftGrid{-6, -4, -2, 2, 4, 6};

/// FFE between the pitch handed to the decoder and the pitch read back from
/// the generated mel, per semitone shift.
ResponsivenessReport evaluate_responsiveness(const model::AcousticModel& model,
                                             const std::vector<std::vector<int>>& texts,
                                             const std::vector<double>& lambdas, double sigma, std::uint64_t seed,
                                             const signal::SignalConfig& signal_config,
                                             const MelPitchOptions& pitch_options);

struct DiversitySet {
  double sigma = 0.0;
  std::vector<std::vector<double>> f0;  // extracted contour per sample
  std::vector<std::vector<int>> durations;
  double dispersion = 0.0;         // mean per-frame std of f0 across samples
  double duration_variance = 0.0;  // mean per-phoneme variance across samples
};

struct DiversityReport {
  std::vector<DiversitySet> sets;
  nlohmann::json to_json() const;
  /// Columnar text: sigma, sample, frame, f0.
  std::string contour_dump() const;
};

DiversityReport diversity_sample(const model::AcousticModel& model, const std::vector<int>& text,
                                 const std::vector<double>& sigmas, std::size_t n, bool dropout_at_inference,
                                 std::uint64_t seed, const signal::SignalConfig& signal_config,
                                 const MelPitchOptions& pitch_options);

struct LatentStats {
  double z_mean = 0.0;
  double z_variance = 0.0;
  double corr_z_hidden = 0.0;
  double corr_x_hidden = 0.0;
  std::size_t positions = 0;
};

struct GaussianityReport {
  LatentStats pitch;
  LatentStats energy;
  nlohmann::json to_json() const;
};

/// Requires a model with flows.
GaussianityReport latent_gaussianity_check(const model::AcousticModel& model,
                                           const std::vector<model::TrainingExample>& data);

/// Pearson correlation; 0 when either side is constant.
double correlation(std::span<const double> a, std::span<const double> b);

}  // namespace varflow::eval
