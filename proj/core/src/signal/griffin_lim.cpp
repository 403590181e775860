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

#include "varflow/signal/griffin_lim.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "varflow/errors.hpp"

namespace varflow::signal {

Waveform griffin_lim(const MelSpectrogram& mel, const SignalConfig& config, int iterations, std::uint64_t seed) {
  config.validate();
  if (iterations < 0) throw ConfigError("griffin_lim iterations must be non-negative");
  const std::size_t frames = mel.frames.rows();
  if (frames == 0) throw DataError("empty mel spectrogram");
  if (mel.frames.cols() != config.n_mels) throw DataError("mel band count does not match the configuration");

  const MelFilterbank fb(config);
  const Stft stft(config.n_fft, config.hop_length);
  const std::size_t bins = config.bins();
  const num::Matrix& pinv = fb.pseudo_inverse();

  // Target linear magnitude.
  num::Matrix target(frames, bins);
  std::vector<double> mel_lin(config.n_mels);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t m = 0; m < config.n_mels; ++m) mel_lin[m] = std::exp(mel.frames(t, m));
    for (std::size_t k = 0; k < bins; ++k) {
      double s = 0.0;
      for (std::size_t m = 0; m < config.n_mels; ++m) s += pinv(k, m) * mel_lin[m];
      target(t, k) = std::max(s, 0.0);
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  ComplexSpectrogram spec;
  spec.frames = frames;
  spec.bins = bins;
  spec.data.resize(frames * bins);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) spec.at(t, k) = std::polar(target(t, k), phase(rng));
  }

  const std::size_t length = (frames - 1) * config.hop_length;
  const std::size_t out_len = std::max<std::size_t>(length, 1);
  std::vector<double> y = stft.synthesize(spec, out_len);
  for (int it = 0; it < iterations; ++it) {
    const ComplexSpectrogram est = stft.analyze(y);
    for (std::size_t i = 0; i < spec.data.size(); ++i) {
      const double mag = std::abs(est.data[i]);
      const std::complex<double> unit = mag > 1e-12 ? est.data[i] / mag : std::complex<double>(1.0, 0.0);
      spec.data[i] = target.data()[i] * unit;
    }
    y = stft.synthesize(spec, out_len);
  }
  return Waveform{std::move(y), config.sample_rate};
}

double mean_abs_log_error(const num::Matrix& a, const num::Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DataError("mel shapes differ");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.data()[i] - b.data()[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace varflow::signal
