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

#include "varflow/signal/pitch.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

#include "varflow/errors.hpp"

namespace varflow::signal {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Autocorrelation of one zero-padded frame via |FFT|^2.
class Autocorrelator {
 public:
  explicit Autocorrelator(std::size_t n) : n_(n), size_(2 * n) {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * size_));
    spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (size_ / 2 + 1)));
    std::lock_guard lock(planner_mutex());
    const int len = static_cast<int>(size_);
    forward_ = fftw_plan_dft_r2c_1d(len, in_, spec_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(len, spec_, in_, FFTW_ESTIMATE);
  }
  ~Autocorrelator() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(inverse_);
    }
    fftw_free(in_);
    fftw_free(spec_);
  }
  Autocorrelator(const Autocorrelator&) = delete;
  Autocorrelator& operator=(const Autocorrelator&) = delete;

  // Returns raw[tau] = sum_n x[n] x[n + tau] for tau < n.
  void run(std::span<const double> frame, std::vector<double>& raw) {
    std::fill(in_, in_ + size_, 0.0);
    std::copy(frame.begin(), frame.end(), in_);
    fftw_execute(forward_);
    for (std::size_t k = 0; k < size_ / 2 + 1; ++k) {
      const double re = spec_[k][0], im = spec_[k][1];
      spec_[k][0] = re * re + im * im;
      spec_[k][1] = 0.0;
    }
    fftw_execute(inverse_);
    raw.resize(n_);
    const double scale = 1.0 / static_cast<double>(size_);
    for (std::size_t t = 0; t < n_; ++t) raw[t] = in_[t] * scale;
  }

 private:
  std::size_t n_;
  std::size_t size_;
  double* in_;
  fftw_complex* spec_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

}  // namespace

PitchContour PitchContour::from_hz(std::vector<double> f0) {
  PitchContour p;
  p.voiced.resize(f0.size());
  for (std::size_t i = 0; i < f0.size(); ++i) {
    if (!(f0[i] > 0.0)) f0[i] = 0.0;
    p.voiced[i] = f0[i] > 0.0 ? 1 : 0;
  }
  p.f0 = std::move(f0);
  return p;
}

PitchContour estimate_f0(const Waveform& w, const SignalConfig& config) {
  if (config.f0_min >= config.f0_max) throw ConfigError("f0_min must be below f0_max");
  if (!(config.f0_min > 0.0)) throw ConfigError("f0_min must be positive");
  if (w.sample_rate < 2.0 * config.f0_max) throw ConfigError("sample rate must be at least twice f0_max");
  if (w.samples.empty()) throw DataError("waveform is empty");
  if (config.n_fft < 4 || config.hop_length == 0) throw ConfigError("invalid framing");

  const std::size_t n = config.n_fft;
  const double rate = static_cast<double>(w.sample_rate);
  const std::size_t lo = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(rate / config.f0_max)));
  const std::size_t hi = std::min<std::size_t>(n - 2, static_cast<std::size_t>(std::ceil(rate / config.f0_min)));
  if (lo >= hi) throw ConfigError("f0 lag band is empty for this n_fft");

  const std::vector<double> padded = reflect_pad(w.samples, n / 2);
  const std::size_t frames = frame_count(w.samples.size(), config.hop_length);
  PitchContour out;
  out.f0.assign(frames, 0.0);
  out.voiced.assign(frames, 0);

  Autocorrelator ac(n);
  std::vector<double> frame(n), raw, cum(n + 1), r(hi + 2, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = padded.data() + t * config.hop_length;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += src[i];
    mean /= static_cast<double>(n);
    cum[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      frame[i] = src[i] - mean;
      cum[i + 1] = cum[i] + frame[i] * frame[i];
    }
    if (cum[n] < 1e-12) continue;
    ac.run(frame, raw);

    for (std::size_t tau = lo - 1; tau <= hi + 1; ++tau) {
      const double head = cum[n - tau];
      const double tail = cum[n] - cum[tau];
      const double denom = std::sqrt(head * tail);
      r[tau] = denom > 1e-12 * cum[n] ? raw[tau] / denom : 0.0;
    }
    double best = -1.0;
    for (std::size_t tau = lo; tau <= hi; ++tau) best = std::max(best, r[tau]);
    if (best < config.voicing_threshold) continue;

    std::size_t pick = 0;
    for (std::size_t tau = lo; tau <= hi; ++tau) {
      if (r[tau] >= r[tau - 1] && r[tau] >= r[tau + 1] && r[tau] >= 0.9 * best) {
        pick = tau;
        break;
      }
    }
    if (pick == 0 || r[pick] < config.voicing_threshold) continue;

    const double a = r[pick - 1], b = r[pick], c = r[pick + 1];
    const double curv = a - 2.0 * b + c;
    double offset = curv < 0.0 ? 0.5 * (a - c) / curv : 0.0;
    offset = std::clamp(offset, -0.5, 0.5);
    const double f0 = rate / (static_cast<double>(pick) + offset);
    if (f0 < config.f0_min * 0.95 || f0 > config.f0_max * 1.05) continue;
    out.f0[t] = f0;
    out.voiced[t] = 1;
  }
  return out;
}

std::optional<std::vector<double>> fill_and_log_pitch(const PitchContour& p) {
  const std::size_t n = p.f0.size();
  std::vector<std::size_t> voiced;
  for (std::size_t i = 0; i < n; ++i) {
    if (p.voiced[i] && p.f0[i] > 0.0) voiced.push_back(i);
  }
  if (voiced.empty()) return std::nullopt;

  std::vector<double> out(n);
  for (std::size_t i = 0; i <= voiced.front(); ++i) out[i] = p.f0[voiced.front()];
  for (std::size_t i = voiced.back(); i < n; ++i) out[i] = p.f0[voiced.back()];
  for (std::size_t j = 0; j + 1 < voiced.size(); ++j) {
    const std::size_t a = voiced[j], b = voiced[j + 1];
    const double fa = p.f0[a], fb = p.f0[b];
    for (std::size_t i = a; i <= b; ++i) {
      const double u = static_cast<double>(i - a) / static_cast<double>(b - a);
      out[i] = fa + (fb - fa) * u;
    }
  }
  for (double& v : out) v = std::log(v);
  return out;
}

}  // namespace varflow::signal
