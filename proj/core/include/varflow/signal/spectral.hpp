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

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "varflow/numerics/matrix.hpp"

namespace varflow::signal {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 22050;
};

/// Analysis settings shared by every feature so frame counts line up.
struct SignalConfig {
  int sample_rate = 22050;
  std::size_t n_fft = 1024;
  std::size_t hop_length = 256;
  std::size_t n_mels = 80;
  double fmin = 0.0;
  double fmax = 0.0;  // 0 means sample_rate / 2
  double f0_min = 60.0;
  double f0_max = 800.0;
  double voicing_threshold = 0.45;
  double floor_eps = 1e-5;

  double effective_fmax() const { return fmax > 0.0 ? fmax : sample_rate / 2.0; }
  std::size_t bins() const { return n_fft / 2 + 1; }
  void validate() const;
};

/// Centered framing with reflection padding: floor(samples / hop) + 1.
std::size_t frame_count(std::size_t samples, std::size_t hop);

/// Reflection-padded copy (n_fft / 2 each side, mirror excludes the edge).
std::vector<double> reflect_pad(std::span<const double> samples, std::size_t pad);

struct ComplexSpectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<std::complex<double>> data;  // frames x bins

  std::complex<double>& at(std::size_t t, std::size_t k) { return data[t * bins + k]; }
  std::complex<double> at(std::size_t t, std::size_t k) const { return data[t * bins + k]; }
};

/// Hann-windowed short-time Fourier transform backed by FFTW. Instances are
/// safe to use from several threads once constructed.
class Stft {
 public:
  Stft(std::size_t n_fft, std::size_t hop);
  ~Stft();
  Stft(const Stft&) = delete;
  Stft& operator=(const Stft&) = delete;

  std::size_t n_fft() const { return n_fft_; }
  std::size_t hop() const { return hop_; }
  const std::vector<double>& window() const { return window_; }

  ComplexSpectrogram analyze(std::span<const double> samples) const;
  num::Matrix magnitude(std::span<const double> samples) const;
  /// Weighted overlap-add inverse; output trimmed to `length` samples.
  std::vector<double> synthesize(const ComplexSpectrogram& spec, std::size_t length) const;

 private:
  struct Plans;
  std::size_t n_fft_;
  std::size_t hop_;
  std::vector<double> window_;
  std::unique_ptr<Plans> plans_;
};

/// Triangular filters on the HTK mel scale, n_mels x bins.
class MelFilterbank {
 public:
  explicit MelFilterbank(const SignalConfig& config);

  const num::Matrix& weights() const { return weights_; }
  /// Center frequency (Hz) of each band.
  const std::vector<double>& centers() const { return centers_; }
  /// bins x n_mels pseudo-inverse.
  const num::Matrix& pseudo_inverse() const { return pinv_; }

  std::vector<double> apply(std::span<const double> magnitude) const;

 private:
  num::Matrix weights_;
  num::Matrix pinv_;
  std::vector<double> centers_;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MelSpectrogram {
  num::Matrix frames;  // T x n_mels, natural log of mel magnitudes
  std::size_t hop_length = 256;
  std::size_t n_fft = 1024;
};

struct EnergyContour {
  std::vector<double> energy;
};

/// Everything computed from one STFT pass.
struct SpectralFeatures {
  num::Matrix magnitude;  // T x bins
  MelSpectrogram mel;
  EnergyContour energy;
};

MelSpectrogram mel_spectrogram(const Waveform& w, const SignalConfig& config);
SpectralFeatures spectral_features(const Waveform& w, const SignalConfig& config);

/// L2 norm of each linear-magnitude frame.
EnergyContour extract_energy(const num::Matrix& magnitude);

}  // namespace varflow::signal
