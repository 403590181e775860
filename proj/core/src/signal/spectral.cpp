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

#include "varflow/signal/spectral.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "varflow/errors.hpp"

namespace varflow::signal {
namespace {

// The FFTW planner is not reentrant; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (ptr == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  double* real() { return static_cast<double*>(ptr); }
  fftw_complex* complex() { return static_cast<fftw_complex*>(ptr); }
  void* ptr;
};

std::size_t reflect_index(long i, long n) {
  if (n == 1) return 0;
  const long period = 2 * (n - 1);
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < n ? m : period - m);
}

void check_waveform(const Waveform& w) {
  if (w.samples.empty()) throw DataError("waveform is empty");
  if (w.sample_rate <= 0) throw DataError("waveform sample rate must be positive");
  for (double s : w.samples) {
    if (!std::isfinite(s)) throw DataError("waveform contains non-finite samples");
  }
}

}  // namespace

void SignalConfig::validate() const {
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
  if (n_fft < 4 || n_fft % 2 != 0) throw ConfigError("n_fft must be an even number >= 4");
  if (hop_length == 0) throw ConfigError("hop_length must be positive");
  if (n_mels == 0) throw ConfigError("n_mels must be positive");
  if (n_mels > bins()) {
    throw ConfigError("n_mels (" + std::to_string(n_mels) + ") exceeds n_fft/2+1 (" + std::to_string(bins()) + ")");
  }
  if (fmin < 0.0 || fmin >= effective_fmax()) throw ConfigError("mel fmin must be in [0, fmax)");
  if (effective_fmax() > sample_rate / 2.0 + 1e-9) throw ConfigError("mel fmax exceeds the Nyquist frequency");
  if (!(f0_min > 0.0) || f0_min >= f0_max) throw ConfigError("f0_min must be positive and below f0_max");
  if (!(floor_eps > 0.0)) throw ConfigError("floor_eps must be positive");
}

std::size_t frame_count(std::size_t samples, std::size_t hop) { return samples / hop + 1; }

std::vector<double> reflect_pad(std::span<const double> samples, std::size_t pad) {
  const long n = static_cast<long>(samples.size());
  std::vector<double> out(samples.size() + 2 * pad);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = samples[reflect_index(static_cast<long>(i) - static_cast<long>(pad), n)];
  }
  return out;
}

struct Stft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

Stft::Stft(std::size_t n_fft, std::size_t hop) : n_fft_(n_fft), hop_(hop), plans_(std::make_unique<Plans>()) {
  if (n_fft < 2 || n_fft % 2 != 0) throw ConfigError("n_fft must be even");
  if (hop == 0) throw ConfigError("hop must be positive");
  window_.resize(n_fft);
  for (std::size_t i = 0; i < n_fft; ++i) {
    window_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_fft));
  }
  FftwBuffer in(sizeof(double) * n_fft);
  FftwBuffer out(sizeof(fftw_complex) * (n_fft / 2 + 1));
  std::lock_guard lock(planner_mutex());
  const int n = static_cast<int>(n_fft);
  plans_->forward = fftw_plan_dft_r2c_1d(n, in.real(), out.complex(), FFTW_ESTIMATE);
  plans_->inverse = fftw_plan_dft_c2r_1d(n, out.complex(), in.real(), FFTW_ESTIMATE);
}

Stft::~Stft() = default;

ComplexSpectrogram Stft::analyze(std::span<const double> samples) const {
  if (samples.empty()) throw DataError("cannot analyze an empty signal");
  const std::size_t bins = n_fft_ / 2 + 1;
  const std::vector<double> padded = reflect_pad(samples, n_fft_ / 2);
  ComplexSpectrogram spec;
  spec.frames = frame_count(samples.size(), hop_);
  spec.bins = bins;
  spec.data.resize(spec.frames * bins);

  FftwBuffer in(sizeof(double) * n_fft_);
  FftwBuffer out(sizeof(fftw_complex) * bins);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const double* src = padded.data() + t * hop_;
    for (std::size_t i = 0; i < n_fft_; ++i) in.real()[i] = src[i] * window_[i];
    fftw_execute_dft_r2c(plans_->forward, in.real(), out.complex());
    for (std::size_t k = 0; k < bins; ++k) spec.at(t, k) = {out.complex()[k][0], out.complex()[k][1]};
  }
  return spec;
}

num::Matrix Stft::magnitude(std::span<const double> samples) const {
  const ComplexSpectrogram spec = analyze(samples);
  num::Matrix mag(spec.frames, spec.bins);
  for (std::size_t i = 0; i < spec.data.size(); ++i) mag.data()[i] = std::abs(spec.data[i]);
  return mag;
}

std::vector<double> Stft::synthesize(const ComplexSpectrogram& spec, std::size_t length) const {
  const std::size_t bins = n_fft_ / 2 + 1;
  if (spec.bins != bins) throw DataError("spectrogram bin count does not match n_fft");
  const std::size_t pad = n_fft_ / 2;
  const std::size_t total = (spec.frames == 0 ? 0 : (spec.frames - 1) * hop_) + n_fft_;
  std::vector<double> acc(total, 0.0), norm(total, 0.0);

  FftwBuffer in(sizeof(fftw_complex) * bins);
  FftwBuffer out(sizeof(double) * n_fft_);
  const double scale = 1.0 / static_cast<double>(n_fft_);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) {
      in.complex()[k][0] = spec.at(t, k).real();
      in.complex()[k][1] = spec.at(t, k).imag();
    }
    // DC and Nyquist must be real for a real inverse.
    in.complex()[0][1] = 0.0;
    in.complex()[bins - 1][1] = 0.0;
    fftw_execute_dft_c2r(plans_->inverse, in.complex(), out.real());
    for (std::size_t i = 0; i < n_fft_; ++i) {
      acc[t * hop_ + i] += out.real()[i] * scale * window_[i];
      norm[t * hop_ + i] += window_[i] * window_[i];
    }
  }
  std::vector<double> y(length, 0.0);
  for (std::size_t i = 0; i < length && i + pad < total; ++i) {
    const double w = norm[i + pad];
    y[i] = w > 1e-10 ? acc[i + pad] / w : 0.0;
  }
  return y;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(const SignalConfig& config) {
  config.validate();
  const std::size_t bins = config.bins();
  const std::size_t n_mels = config.n_mels;
  weights_ = num::Matrix(n_mels, bins);
  const double lo = hz_to_mel(config.fmin);
  const double hi = hz_to_mel(config.effective_fmax());
  std::vector<double> edges(n_mels + 2);
  for (std::size_t m = 0; m < edges.size(); ++m) {
    edges[m] = mel_to_hz(lo + (hi - lo) * static_cast<double>(m) / static_cast<double>(n_mels + 1));
  }
  centers_.assign(edges.begin() + 1, edges.end() - 1);
  const double bin_hz = static_cast<double>(config.sample_rate) / static_cast<double>(config.n_fft);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      weights_(m, k) = w;
    }
  }

  Eigen::MatrixXd fb(n_mels, bins);
  for (std::size_t m = 0; m < n_mels; ++m) {
    for (std::size_t k = 0; k < bins; ++k) fb(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = weights_(m, k);
  }
  const Eigen::MatrixXd pinv = fb.completeOrthogonalDecomposition().pseudoInverse();
  pinv_ = num::Matrix(bins, n_mels);
  for (std::size_t k = 0; k < bins; ++k) {
    for (std::size_t m = 0; m < n_mels; ++m) pinv_(k, m) = pinv(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
  }
}

std::vector<double> MelFilterbank::apply(std::span<const double> magnitude) const {
  if (magnitude.size() != weights_.cols()) throw DataError("magnitude frame size does not match the filterbank");
  std::vector<double> out(weights_.rows(), 0.0);
  for (std::size_t m = 0; m < weights_.rows(); ++m) {
    const auto w = weights_.row(m);
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * magnitude[k];
    out[m] = s;
  }
  return out;
}

EnergyContour extract_energy(const num::Matrix& magnitude) {
  EnergyContour e;
  e.energy.resize(magnitude.rows());
  for (std::size_t t = 0; t < magnitude.rows(); ++t) {
    double s = 0.0;
    for (double v : magnitude.row(t)) s += v * v;
    e.energy[t] = std::sqrt(s);
  }
  return e;
}

SpectralFeatures spectral_features(const Waveform& w, const SignalConfig& config) {
  config.validate();
  check_waveform(w);
  if (w.sample_rate != config.sample_rate) {
    throw DataError("waveform rate " + std::to_string(w.sample_rate) + " differs from configured rate " +
                    std::to_string(config.sample_rate));
  }
  const Stft stft(config.n_fft, config.hop_length);
  const MelFilterbank fb(config);
  SpectralFeatures out;
  out.magnitude = stft.magnitude(w.samples);
  out.energy = extract_energy(out.magnitude);
  out.mel.hop_length = config.hop_length;
  out.mel.n_fft = config.n_fft;
  out.mel.frames = num::Matrix(out.magnitude.rows(), config.n_mels);
  for (std::size_t t = 0; t < out.magnitude.rows(); ++t) {
    const std::vector<double> m = fb.apply(out.magnitude.row(t));
    for (std::size_t j = 0; j < m.size(); ++j) out.mel.frames(t, j) = std::log(std::max(m[j], config.floor_eps));
  }
  return out;
}

MelSpectrogram mel_spectrogram(const Waveform& w, const SignalConfig& config) {
  return spectral_features(w, config).mel;
}

}  // namespace varflow::signal
