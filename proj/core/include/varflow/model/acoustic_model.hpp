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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "varflow/flows/flow.hpp"
#include "varflow/model/blocks.hpp"
#include "varflow/model/config.hpp"
#include "varflow/model/normalization.hpp"
#include "varflow/numerics/matrix.hpp"
#include "varflow/numerics/parameter_set.hpp"
#include "varflow/signal/feature_cache.hpp"

namespace varflow::model {

/// One utterance in model space: standardized frame-rate targets plus masks.
/// Trailing padding (mask 0) is allowed on both axes; padded phonemes carry
/// duration 0.
struct TrainingExample {
  std::vector<int> phonemes;
  std::vector<std::uint8_t> phoneme_mask;
  std::vector<int> durations;
  std::vector<std::uint8_t> frame_mask;
  num::Matrix mel;                 // T x n_mels, standardized
  std::vector<double> pitch;       // T, standardized filled log-f0
  std::vector<double> energy;      // T, standardized

  std::size_t phoneme_count() const { return phonemes.size(); }
  std::size_t frame_count() const { return frame_mask.size(); }
  std::size_t real_frames() const;
  std::size_t real_phonemes() const;
  void validate(std::size_t n_mels) const;

  /// Copy with extra trailing padding.
  TrainingExample padded(std::size_t extra_phonemes, std::size_t extra_frames) const;
};

/// Standardizes cached features. nullopt when the utterance has no voiced
/// frame (pitch cannot be filled).
std::optional<TrainingExample> make_example(const signal::UtteranceFeatures& f, const NormalizationStats& stats);

/// Masked sums for one utterance; batch losses divide summed numerators by
/// summed counts.
struct LossTerms {
  num::Tensor melspec;
  num::Tensor duration;
  num::Tensor pitch;
  num::Tensor energy;
  std::size_t melspec_count = 0;
  std::size_t duration_count = 0;
  std::size_t pitch_count = 0;
  std::size_t energy_count = 0;
};

/// Per-position variance values at the modeling rate (frame or phoneme).
struct VarianceTrack {
  std::vector<double> x;  // standardized raw variance
  std::vector<double> z;  // latent (empty in mse mode)
};

/// Called with standardized pitch/energy at the modeling rate before they
/// are handed to the decoder.
using VarianceEdit = std::function<void(std::vector<double>& pitch, std::vector<double>& energy)>;

struct SynthesisOptions {
  double sigma = 0.333;
  std::uint64_t seed = 0;
  bool dropout_at_inference = false;
  VarianceEdit edit;
  /// In flow mode an edit is pushed back through the flow to get the latent
  /// the decoder consumes. By default a track the edit left bit-identical
  /// keeps its sampled latent; set this to re-encode it anyway.
  bool reencode_unchanged = false;
  /// Use these durations instead of the predicted ones.
  std::vector<int> durations;
};

struct SynthesisResult {
  num::Matrix mel;                 // T x n_mels, log-mel (destandardized)
  std::vector<int> durations;
  VarianceTrack pitch;             // sampled or predicted, before any edit
  VarianceTrack energy;
  VarianceTrack pitch_used;        // what reached the decoder
  VarianceTrack energy_used;
  std::vector<double> pitch_hz;    // frame rate, from pitch_used.x
  std::vector<double> energy_frame;
};

/// Latents and conditioning summary for every real position of an example.
struct LatentAnalysis {
  std::vector<double> pitch_x, pitch_z;
  std::vector<double> energy_x, energy_z;
  std::vector<double> hidden_norm;  // L2 norm of the conditioning row
};

class AcousticModel {
 public:
  AcousticModel(const ModelConfig& config, std::uint64_t init_seed);

  const ModelConfig& config() const { return config_; }
  num::ParameterSet& parameters() { return params_; }
  const num::ParameterSet& parameters() const { return params_; }

  const NormalizationStats& stats() const { return stats_; }
  void set_stats(NormalizationStats stats);

  bool has_flows() const { return config_.mode != VarianceMode::mse; }
  const flows::FlowStack& pitch_flow() const { return *pitch_flow_; }
  const flows::FlowStack& energy_flow() const { return *energy_flow_; }

  // Building blocks, exposed for tests and diagnostics.
  num::Tensor encode(std::span<const int> phonemes, std::span<const std::uint8_t> mask,
                     const ForwardContext& ctx) const;
  num::Tensor predict_log_durations(const num::Tensor& h_phoneme, std::span<const std::uint8_t> mask,
                                    const ForwardContext& ctx) const;
  /// Regression output (mse mode only).
  num::Tensor predict_pitch(const num::Tensor& h, std::span<const std::uint8_t> mask, const ForwardContext& ctx) const;
  num::Tensor predict_energy(const num::Tensor& h, std::span<const std::uint8_t> mask, const ForwardContext& ctx) const;
  /// h + proj_pitch(feed_pitch) + proj_energy(feed_energy), padding rows zeroed.
  /// Feeds are frame-rate T x 1 columns.
  num::Tensor decoder_input(const num::Tensor& h_frame, const num::Tensor& feed_pitch,
                            const num::Tensor& feed_energy, std::span<const std::uint8_t> frame_mask) const;
  /// Chooses the decoder feed for the configured mode.
  num::Tensor select_feed(const num::Tensor& x, const num::Tensor& z) const;
  /// Decoder blocks + projection to standardized mel.
  num::Tensor decode(const num::Tensor& input, std::span<const std::uint8_t> frame_mask,
                     const ForwardContext& ctx) const;

  LossTerms loss_terms(const TrainingExample& ex, const ForwardContext& ctx) const;

  /// Throws std::logic_error when no normalization statistics are set.
  SynthesisResult synthesize(std::span<const int> phonemes, const SynthesisOptions& options) const;

  LatentAnalysis analyze_latents(const TrainingExample& ex) const;

 private:
  std::size_t count_real(std::span<const std::uint8_t> mask) const;

  ModelConfig config_;
  num::ParameterSet params_;
  NormalizationStats stats_;
  num::Tensor embedding_;
  FftStack encoder_;
  ScalarPredictor duration_predictor_;
  std::optional<flows::FlowStack> pitch_flow_, energy_flow_;
  ScalarPredictor pitch_predictor_, energy_predictor_;
  num::Linear pitch_proj_, energy_proj_;
  FftStack decoder_;
  num::Linear mel_out_;
};

}  // namespace varflow::model
