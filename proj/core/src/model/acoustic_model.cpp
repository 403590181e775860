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

#include "varflow/model/acoustic_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "varflow/errors.hpp"
#include "varflow/model/length_regulator.hpp"
#include "varflow/numerics/ops.hpp"
#include "varflow/signal/phoneme.hpp"
#include "varflow/signal/pitch.hpp"

namespace varflow::model {

using num::Tensor;

namespace {

std::size_t count_ones(std::span<const std::uint8_t> m) {
  return static_cast<std::size_t>(std::count_if(m.begin(), m.end(), [](std::uint8_t v) { return v != 0; }));
}

// Number of leading mask entries set; padding must be trailing.
std::size_t prefix_length(std::span<const std::uint8_t> m, const char* what) {
  const std::size_t n = count_ones(m);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if ((m[i] != 0) != (i < n)) throw DataError(std::string(what) + " padding must be trailing");
  }
  return n;
}

Tensor column(std::span<const double> v) { return Tensor::column(v); }

std::vector<double> to_vector(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

Tensor masked_square_sum(const Tensor& diff, std::span<const std::uint8_t> mask) {
  return num::sum(num::square(num::mul(diff, num::mask_column(mask))));
}

}  // namespace

std::size_t TrainingExample::real_frames() const { return count_ones(frame_mask); }
std::size_t TrainingExample::real_phonemes() const { return count_ones(phoneme_mask); }

void TrainingExample::validate(std::size_t n_mels) const {
  const std::size_t n = phonemes.size(), t = frame_mask.size();
  if (n == 0) throw DataError("example has no phonemes");
  if (phoneme_mask.size() != n || durations.size() != n) throw DataError("phoneme, mask and duration lengths differ");
  if (mel.rows() != t || mel.cols() != n_mels || pitch.size() != t || energy.size() != t) {
    throw DataError("frame-rate targets disagree with the frame mask length");
  }
  const std::size_t real_n = prefix_length(phoneme_mask, "phoneme");
  const std::size_t real_t = prefix_length(frame_mask, "frame");
  long total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < real_n && durations[i] < 1) throw DataError("duration below one frame at training time");
    if (i >= real_n && durations[i] != 0) throw DataError("padded phoneme with nonzero duration");
    total += durations[i];
  }
  if (total != static_cast<long>(real_t)) {
    throw DataError("durations sum to " + std::to_string(total) + " but there are " + std::to_string(real_t) +
                    " real frames");
  }
}

TrainingExample TrainingExample::padded(std::size_t extra_phonemes, std::size_t extra_frames) const {
  TrainingExample e = *this;
  e.phonemes.resize(phonemes.size() + extra_phonemes, 0);
  e.phoneme_mask.resize(e.phonemes.size(), 0);
  e.durations.resize(e.phonemes.size(), 0);
  const std::size_t t = frame_mask.size() + extra_frames;
  e.frame_mask.resize(t, 0);
  e.pitch.resize(t, 0.0);
  e.energy.resize(t, 0.0);
  std::vector<double> m = mel.data();
  m.resize(t * mel.cols(), 0.0);
  e.mel = num::Matrix(t, mel.cols(), std::move(m));
  return e;
}

std::optional<TrainingExample> make_example(const signal::UtteranceFeatures& f, const NormalizationStats& stats) {
  f.validate();
  if (!stats.initialized()) throw std::logic_error("normalization statistics are not set");
  if (stats.mel_mean.size() != f.mel.cols()) throw DataError("stats and features disagree on n_mels");
  const auto log_f0 = signal::fill_and_log_pitch(signal::PitchContour{f.f0, f.voiced});
  if (!log_f0) return std::nullopt;
  TrainingExample e;
  e.phonemes = f.phonemes;
  e.durations = f.durations;
  e.phoneme_mask.assign(f.phonemes.size(), 1);
  const std::size_t t = f.frames();
  e.frame_mask.assign(t, 1);
  e.mel = num::Matrix(t, f.mel.cols());
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < f.mel.cols(); ++j) e.mel(i, j) = (f.mel(i, j) - stats.mel_mean[j]) / stats.mel_std;
  }
  e.pitch.resize(t);
  e.energy.resize(t);
  for (std::size_t i = 0; i < t; ++i) {
    e.pitch[i] = stats.standardize_pitch((*log_f0)[i]);
    e.energy[i] = stats.standardize_energy(f.energy[i]);
  }
  return e;
}

AcousticModel::AcousticModel(const ModelConfig& config, std::uint64_t init_seed) : config_(config) {
  config_.validate();
  num::Rng rng(init_seed);
  const std::size_t d = config_.d_model;
  {
    const double limit = std::sqrt(6.0 / static_cast<double>(config_.vocab_size + d));
    std::uniform_real_distribution<double> u(-limit, limit);
    std::vector<double> init(config_.vocab_size * d);
    for (double& v : init) v = u(rng);
    embedding_ = params_.create("encoder.embedding", config_.vocab_size, d, std::move(init));
  }
  encoder_ = FftStack(params_, "encoder", config_.encoder_layers, d, config_.heads, config_.ff_hidden,
                      config_.kernel, rng);
  duration_predictor_ =
      ScalarPredictor(params_, "duration_predictor", d, config_.predictor_hidden, config_.predictor_kernel, rng);
  if (has_flows()) {
    pitch_flow_.emplace(params_, "pitch_flow", config_.flow_config(), rng);
    energy_flow_.emplace(params_, "energy_flow", config_.flow_config(), rng);
  } else {
    pitch_predictor_ =
        ScalarPredictor(params_, "pitch_predictor", d, config_.predictor_hidden, config_.predictor_kernel, rng);
    energy_predictor_ =
        ScalarPredictor(params_, "energy_predictor", d, config_.predictor_hidden, config_.predictor_kernel, rng);
  }
  pitch_proj_ = num::Linear(params_, "pitch_proj", 1, d, rng);
  energy_proj_ = num::Linear(params_, "energy_proj", 1, d, rng);
  decoder_ = FftStack(params_, "decoder", config_.decoder_layers, d, config_.heads, config_.ff_hidden,
                      config_.kernel, rng);
  mel_out_ = num::Linear(params_, "decoder.mel_out", d, config_.n_mels, rng);
}

void AcousticModel::set_stats(NormalizationStats stats) {
  if (stats.mel_mean.size() != config_.n_mels) throw DataError("stats carry the wrong number of mel bands");
  stats_ = std::move(stats);
}

std::size_t AcousticModel::count_real(std::span<const std::uint8_t> mask) const { return count_ones(mask); }

Tensor AcousticModel::encode(std::span<const int> phonemes, std::span<const std::uint8_t> mask,
                             const ForwardContext& ctx) const {
  if (phonemes.empty()) throw DataError("cannot encode an empty phoneme sequence");
  if (mask.size() != phonemes.size()) throw DataError("phoneme mask length differs from the sequence");
  for (int id : phonemes) {
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
      throw DataError("phoneme id " + std::to_string(id) + " outside vocabulary of " +
                      std::to_string(config_.vocab_size));
    }
  }
  return encoder_(num::embedding(embedding_, phonemes), mask, ctx.encoder_dropout, ctx.rng);
}

Tensor AcousticModel::predict_log_durations(const Tensor& h_phoneme, std::span<const std::uint8_t> mask,
                                            const ForwardContext& ctx) const {
  return duration_predictor_(h_phoneme, num::mask_column(mask), ctx.decoder_dropout, ctx.rng);
}

Tensor AcousticModel::predict_pitch(const Tensor& h, std::span<const std::uint8_t> mask,
                                    const ForwardContext& ctx) const {
  if (has_flows()) throw std::logic_error("pitch regression exists only in mse mode");
  return pitch_predictor_(h, num::mask_column(mask), ctx.decoder_dropout, ctx.rng);
}

Tensor AcousticModel::predict_energy(const Tensor& h, std::span<const std::uint8_t> mask,
                                     const ForwardContext& ctx) const {
  if (has_flows()) throw std::logic_error("energy regression exists only in mse mode");
  return energy_predictor_(h, num::mask_column(mask), ctx.decoder_dropout, ctx.rng);
}

Tensor AcousticModel::decoder_input(const Tensor& h_frame, const Tensor& feed_pitch, const Tensor& feed_energy,
                                    std::span<const std::uint8_t> frame_mask) const {
  if (feed_pitch.rows() != h_frame.rows() || feed_energy.rows() != h_frame.rows()) {
    throw DataError("variance feed length differs from the frame count");
  }
  const Tensor sum = num::add(num::add(h_frame, pitch_proj_(feed_pitch)), energy_proj_(feed_energy));
  return num::mul(sum, num::mask_column(frame_mask));
}

Tensor AcousticModel::select_feed(const Tensor& x, const Tensor& z) const {
  return config_.mode == VarianceMode::flow ? z : x;
}

Tensor AcousticModel::decode(const Tensor& input, std::span<const std::uint8_t> frame_mask,
                             const ForwardContext& ctx) const {
  const Tensor y = decoder_(input, frame_mask, ctx.decoder_dropout, ctx.rng);
  return num::mul(mel_out_(y), num::mask_column(frame_mask));
}

LossTerms AcousticModel::loss_terms(const TrainingExample& ex, const ForwardContext& ctx) const {
  ex.validate(config_.n_mels);
  const std::size_t frames = ex.frame_count();
  const std::size_t real_frames = ex.real_frames();
  LossTerms out;

  const Tensor h_ph = encode(ex.phonemes, ex.phoneme_mask, ctx);
  const Tensor log_d = predict_log_durations(h_ph, ex.phoneme_mask, ctx);
  std::vector<double> log_target(ex.phonemes.size(), 0.0);
  for (std::size_t i = 0; i < log_target.size(); ++i) {
    if (ex.phoneme_mask[i]) log_target[i] = std::log(static_cast<double>(ex.durations[i]));
  }
  out.duration = masked_square_sum(num::sub(log_d, column(log_target)), ex.phoneme_mask);
  out.duration_count = ex.real_phonemes();

  const Tensor h_fr = length_regulate(h_ph, ex.durations, frames);
  const bool phone_rate = config_.granularity == Granularity::phoneme;
  const Tensor& cond = phone_rate ? h_ph : h_fr;
  const std::span<const std::uint8_t> vmask = phone_rate ? std::span(ex.phoneme_mask) : std::span(ex.frame_mask);

  auto at_rate = [&](const std::vector<double>& frame_values) {
    if (!phone_rate) return frame_values;
    std::vector<double> avg = signal::phoneme_average(std::span(frame_values).first(real_frames),
                                                      std::span(ex.durations).first(ex.real_phonemes()));
    avg.resize(ex.phonemes.size(), 0.0);
    return avg;
  };
  const std::vector<int> frame_index_durations = ex.durations;
  auto to_frames = [&](const Tensor& t) {
    if (!phone_rate) return t;
    return num::gather_rows(t, frame_to_phoneme(frame_index_durations, frames));
  };

  auto variance = [&](const std::vector<double>& target, const std::optional<flows::FlowStack>& flow,
                      const ScalarPredictor& predictor, Tensor& loss, std::size_t& count) {
    const Tensor x = column(at_rate(target));
    count = count_real(vmask);
    if (has_flows()) {
      const flows::FlowForward fwd = flow->forward(x, cond, vmask);
      loss = flow->nll_sum(fwd, vmask);
      return to_frames(select_feed(x, fwd.z));
    }
    const Tensor pred = predictor(cond, num::mask_column(vmask), ctx.decoder_dropout, ctx.rng);
    loss = masked_square_sum(num::sub(pred, x), vmask);
    return to_frames(x);
  };
  const Tensor feed_p = variance(ex.pitch, pitch_flow_, pitch_predictor_, out.pitch, out.pitch_count);
  const Tensor feed_e = variance(ex.energy, energy_flow_, energy_predictor_, out.energy, out.energy_count);

  const Tensor mel = decode(decoder_input(h_fr, feed_p, feed_e, ex.frame_mask), ex.frame_mask, ctx);
  out.melspec = masked_square_sum(num::sub(mel, Tensor::from(ex.mel)), ex.frame_mask);
  out.melspec_count = real_frames * config_.n_mels;
  return out;
}

SynthesisResult AcousticModel::synthesize(std::span<const int> phonemes, const SynthesisOptions& options) const {
  if (!stats_.initialized()) throw std::logic_error("model is uninitialized: no normalization statistics");
  if (options.sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
  num::NoGradGuard no_grad;
  num::Rng latent_rng(options.seed);
  num::Rng dropout_rng(options.seed ^ 0x9E3779B97F4A7C15ULL);
  ForwardContext enc_ctx;
  if (options.dropout_at_inference) {
    enc_ctx.encoder_dropout = config_.dropout;
    enc_ctx.rng = &dropout_rng;
  }
  const ForwardContext plain;

  const std::vector<std::uint8_t> pmask(phonemes.size(), 1);
  const Tensor h_ph = encode(phonemes, pmask, enc_ctx);

  SynthesisResult r;
  if (!options.durations.empty()) {
    if (options.durations.size() != phonemes.size()) throw DataError("duration override length mismatch");
    for (int d : options.durations) {
      if (d < 1) throw DataError("duration override below one frame");
    }
    r.durations = options.durations;
  } else {
    const Tensor log_d = predict_log_durations(h_ph, pmask, plain);
    for (double v : log_d.values()) r.durations.push_back(duration_from_log(v));
  }
  const Tensor h_fr = length_regulate(h_ph, r.durations);
  const std::size_t frames = h_fr.rows();
  const std::vector<std::uint8_t> fmask(frames, 1);

  const bool phone_rate = config_.granularity == Granularity::phoneme;
  const Tensor& cond = phone_rate ? h_ph : h_fr;
  const std::vector<std::uint8_t> vmask(cond.rows(), 1);

  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](const std::optional<flows::FlowStack>& flow, const ScalarPredictor& predictor) {
    VarianceTrack t;
    if (has_flows()) {
      t.z.resize(cond.rows());
      for (double& v : t.z) v = options.sigma * normal(latent_rng);
      t.x = flow->inverse(t.z, cond, vmask);
    } else {
      t.x = to_vector(predictor(cond, num::mask_column(vmask), 0.0, nullptr));
    }
    return t;
  };
  r.pitch = draw(pitch_flow_, pitch_predictor_);
  r.energy = draw(energy_flow_, energy_predictor_);

  r.pitch_used = r.pitch;
  r.energy_used = r.energy;
  if (options.edit) {
    options.edit(r.pitch_used.x, r.energy_used.x);
    if (r.pitch_used.x.size() != r.pitch.x.size() || r.energy_used.x.size() != r.energy.x.size()) {
      throw DataError("variance edit changed the sequence length");
    }
    auto reencode = [&](const std::optional<flows::FlowStack>& flow, VarianceTrack& used, const VarianceTrack& orig) {
      if (!has_flows()) return;
      if (used.x == orig.x && !options.reencode_unchanged) return;
      used.z = to_vector(flow->forward(column(used.x), cond, vmask).z);
    };
    reencode(pitch_flow_, r.pitch_used, r.pitch);
    reencode(energy_flow_, r.energy_used, r.energy);
  }

  auto feed = [&](const VarianceTrack& t) {
    Tensor f = select_feed(column(t.x), t.z.empty() ? Tensor() : column(t.z));
    return phone_rate ? num::gather_rows(f, frame_to_phoneme(r.durations, frames)) : f;
  };
  const Tensor mel = decode(decoder_input(h_fr, feed(r.pitch_used), feed(r.energy_used), fmask), fmask, plain);

  r.mel = num::Matrix(frames, config_.n_mels);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t j = 0; j < config_.n_mels; ++j) {
      r.mel(t, j) = mel(t, j) * stats_.mel_std + stats_.mel_mean[j];
    }
  }
  const std::vector<double> px = phone_rate ? signal::expand_by_durations(r.pitch_used.x, r.durations) : r.pitch_used.x;
  const std::vector<double> ex = phone_rate ? signal::expand_by_durations(r.energy_used.x, r.durations) : r.energy_used.x;
  for (double v : px) r.pitch_hz.push_back(std::exp(stats_.pitch_to_log(v)));
  for (double v : ex) r.energy_frame.push_back(stats_.energy_from(v));
  return r;
}

LatentAnalysis AcousticModel::analyze_latents(const TrainingExample& ex) const {
  ex.validate(config_.n_mels);
  num::NoGradGuard no_grad;
  const ForwardContext plain;
  const Tensor h_ph = encode(ex.phonemes, ex.phoneme_mask, plain);
  const Tensor h_fr = length_regulate(h_ph, ex.durations, ex.frame_count());
  const bool phone_rate = config_.granularity == Granularity::phoneme;
  const Tensor& cond = phone_rate ? h_ph : h_fr;
  const std::span<const std::uint8_t> vmask = phone_rate ? std::span(ex.phoneme_mask) : std::span(ex.frame_mask);
  const std::size_t n = count_real(vmask);

  auto at_rate = [&](const std::vector<double>& v) {
    if (!phone_rate) return v;
    std::vector<double> avg = signal::phoneme_average(std::span(v).first(ex.real_frames()),
                                                      std::span(ex.durations).first(ex.real_phonemes()));
    avg.resize(ex.phonemes.size(), 0.0);
    return avg;
  };
  LatentAnalysis a;
  const std::vector<double> xp = at_rate(ex.pitch), xe = at_rate(ex.energy);
  a.pitch_x.assign(xp.begin(), xp.begin() + static_cast<long>(n));
  a.energy_x.assign(xe.begin(), xe.begin() + static_cast<long>(n));
  if (has_flows()) {
    const auto zp = to_vector(pitch_flow_->forward(column(xp), cond, vmask).z);
    const auto ze = to_vector(energy_flow_->forward(column(xe), cond, vmask).z);
    a.pitch_z.assign(zp.begin(), zp.begin() + static_cast<long>(n));
    a.energy_z.assign(ze.begin(), ze.begin() + static_cast<long>(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cond.cols(); ++j) s += cond(i, j) * cond(i, j);
    a.hidden_norm.push_back(std::sqrt(s));
  }
  return a;
}

}  // namespace varflow::model
