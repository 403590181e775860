#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>

#include "varflow/errors.hpp"
#include "varflow/signal/feature_cache.hpp"
#include "varflow/signal/griffin_lim.hpp"
#include "varflow/signal/phoneme.hpp"
#include "varflow/signal/pitch.hpp"
#include "varflow/signal/spectral.hpp"

using namespace varflow;
using namespace varflow::signal;

namespace {

Waveform sine(double hz, double seconds, int rate = 22050, double amp = 0.5) {
  Waveform w;
  w.sample_rate = rate;
  const auto n = static_cast<std::size_t>(seconds * rate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.samples[i] = amp * std::sin(2.0 * std::numbers::pi * hz * i / rate);
  return w;
}

// Straight O(N^2) DFT of one Hann-windowed, reflect-padded frame.
std::vector<double> naive_frame_magnitude(const std::vector<double>& x, std::size_t t, std::size_t n_fft,
                                          std::size_t hop) {
  const long n = static_cast<long>(x.size());
  std::vector<double> frame(n_fft);
  for (std::size_t i = 0; i < n_fft; ++i) {
    long j = static_cast<long>(t * hop + i) - static_cast<long>(n_fft / 2);
    if (j < 0) j = -j;
    if (j >= n) j = 2 * (n - 1) - j;
    const double win = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n_fft);
    frame[i] = x[static_cast<std::size_t>(j)] * win;
  }
  std::vector<double> mag(n_fft / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < n_fft; ++i) s += frame[i] * std::polar(1.0, -2.0 * std::numbers::pi * k * i / n_fft);
    mag[k] = std::abs(s);
  }
  return mag;
}

}  // namespace

TEST(MelSpectrogram, SilenceIsFloor) {
  SignalConfig cfg;
  for (std::size_t len : {1u, 300u, 5000u}) {
    const auto mel = mel_spectrogram(Waveform{std::vector<double>(len, 0.0), 22050}, cfg);
    for (double v : mel.frames.data()) EXPECT_DOUBLE_EQ(v, std::log(1e-5));
  }
}

TEST(MelSpectrogram, FrameCountFollowsCenteredFraming) {
  SignalConfig cfg;
  const auto mel = mel_spectrogram(Waveform{std::vector<double>(22050, 0.1), 22050}, cfg);
  EXPECT_EQ(mel.frames.rows(), 87u);
  EXPECT_EQ(mel.frames.cols(), 80u);
  EXPECT_EQ(frame_count(255, 256), 1u);
  EXPECT_EQ(frame_count(256, 256), 2u);
}

TEST(MelSpectrogram, Errors) {
  SignalConfig cfg;
  EXPECT_THROW(mel_spectrogram(Waveform{{}, 22050}, cfg), DataError);
  SignalConfig bad = cfg;
  bad.n_mels = 514;
  EXPECT_THROW(mel_spectrogram(Waveform{std::vector<double>(100, 0.0), 22050}, bad), ConfigError);
  EXPECT_THROW(mel_spectrogram(Waveform{{0.0, NAN}, 22050}, cfg), DataError);
}

TEST(Stft, MagnitudeMatchesNaiveDft) {
  const Waveform w = sine(440.0, 0.1);
  const Stft stft(1024, 256);
  const auto mag = stft.magnitude(w.samples);
  for (std::size_t t : {std::size_t{0}, std::size_t{3}, mag.rows() - 1}) {
    const auto ref = naive_frame_magnitude(w.samples, t, 1024, 256);
    for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(mag(t, k), ref[k], 1e-8);
  }
}

TEST(MelSpectrogram, SineEnergyLandsInItsBand) {
  SignalConfig cfg;
  const Waveform w = sine(440.0, 1.0);
  const auto mel = mel_spectrogram(w, cfg);

  // Independent band search: HTK triangle with the largest response at 440 Hz,
  // with the reference spectrum from the naive DFT deciding ties.
  const double top = 2595.0 * std::log10(1.0 + 11025.0 / 700.0);
  auto edge = [&](int m) { return 700.0 * (std::pow(10.0, top * m / 81.0 / 2595.0) - 1.0); };
  int band = -1;
  double best = 0.0;
  for (int m = 0; m < 80; ++m) {
    const double l = edge(m), c = edge(m + 1), r = edge(m + 2);
    const double resp = 440.0 <= c ? (440.0 - l) / (c - l) : (r - 440.0) / (r - c);
    if (resp > best) best = resp, band = m;
  }
  ASSERT_GE(band, 0);

  const std::size_t interior_lo = 2, interior_hi = mel.frames.rows() - 2;
  int hits = 0, total = 0;
  for (std::size_t t = interior_lo; t < interior_hi; ++t) {
    const auto row = mel.frames.row(t);
    const auto arg = std::max_element(row.begin(), row.end()) - row.begin();
    hits += arg == band;
    ++total;
  }
  EXPECT_GE(hits, 0.95 * total) << "band " << band;

  // The spectral peak itself is where the naive DFT puts it.
  const auto ref = naive_frame_magnitude(w.samples, 40, 1024, 256);
  const auto peak = std::max_element(ref.begin(), ref.end()) - ref.begin();
  EXPECT_NEAR(peak * 22050.0 / 1024.0, 440.0, 22050.0 / 1024.0);
}

TEST(Pitch, SineIsVoicedAtItsFrequency) {
  SignalConfig cfg;
  const Waveform w = sine(220.0, 1.0);
  const auto p = estimate_f0(w, cfg);
  ASSERT_EQ(p.size(), 87u);
  for (std::size_t t = 2; t + 2 < p.size(); ++t) {
    EXPECT_TRUE(p.voiced[t]) << t;
    EXPECT_NEAR(p.f0[t], 220.0, 2.0) << t;
  }
}

TEST(Pitch, NoiseIsMostlyUnvoiced) {
  SignalConfig cfg;
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Waveform w{std::vector<double>(22050), 22050};
  for (double& s : w.samples) s = u(rng);
  const auto p = estimate_f0(w, cfg);
  const auto unvoiced = std::count(p.voiced.begin(), p.voiced.end(), 0);
  EXPECT_GE(unvoiced, 0.9 * static_cast<double>(p.size()));
}

TEST(Pitch, SilenceIsUnvoiced) {
  SignalConfig cfg;
  const auto p = estimate_f0(Waveform{std::vector<double>(4000, 0.0), 22050}, cfg);
  for (std::size_t t = 0; t < p.size(); ++t) {
    EXPECT_FALSE(p.voiced[t]);
    EXPECT_EQ(p.f0[t], 0.0);
  }
}

TEST(Pitch, Errors) {
  SignalConfig cfg;
  cfg.f0_min = 800.0;
  cfg.f0_max = 60.0;
  EXPECT_THROW(estimate_f0(sine(220, 0.1), cfg), ConfigError);
  SignalConfig low;
  EXPECT_THROW(estimate_f0(sine(220, 0.1, 1000), low), ConfigError);
}

TEST(Pitch, LengthsAlignWithMel) {
  SignalConfig cfg;
  for (std::size_t len : {1000u, 4097u, 12345u}) {
    Waveform w = sine(180.0, 1.0);
    w.samples.resize(len);
    const auto feats = spectral_features(w, cfg);
    const auto p = estimate_f0(w, cfg);
    EXPECT_EQ(feats.mel.frames.rows(), p.size());
    EXPECT_EQ(feats.energy.energy.size(), p.size());
  }
}

TEST(FillPitch, Examples) {
  const double e = std::exp(1.0);
  auto a = fill_and_log_pitch(PitchContour{{e, 0.0, e}, {1, 0, 1}});
  ASSERT_TRUE(a);
  for (double v : *a) EXPECT_NEAR(v, 1.0, 1e-12);

  auto b = fill_and_log_pitch(PitchContour{{100, 0, 0, 200}, {1, 0, 0, 1}});
  ASSERT_TRUE(b);
  const double expect[] = {100.0, 100.0 + 100.0 / 3.0, 100.0 + 200.0 / 3.0, 200.0};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR((*b)[i], std::log(expect[i]), 1e-12);

  auto c = fill_and_log_pitch(PitchContour{{120, 130, 140}, {1, 1, 1}});
  ASSERT_TRUE(c);
  EXPECT_DOUBLE_EQ((*c)[1], std::log(130.0));

  EXPECT_FALSE(fill_and_log_pitch(PitchContour{{0, 0}, {0, 0}}));
}

TEST(FillPitch, EdgesHeldAndIdempotentWhenVoiced) {
  auto a = fill_and_log_pitch(PitchContour{{0, 150, 0, 0}, {0, 1, 0, 0}});
  ASSERT_TRUE(a);
  for (double v : *a) EXPECT_DOUBLE_EQ(v, std::log(150.0));

  const auto once = fill_and_log_pitch(PitchContour{{110, 220, 330}, {1, 1, 1}});
  std::vector<double> hz;
  for (double v : *once) hz.push_back(std::exp(v));
  const auto twice = fill_and_log_pitch(PitchContour::from_hz(hz));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR((*once)[i], (*twice)[i], 1e-12);
}

TEST(Energy, Examples) {
  num::Matrix m(3, 513, 0.0);
  m(1, 7) = 3.0;
  for (std::size_t k = 0; k < 513; ++k) m(2, k) = 1.0;
  const auto e = extract_energy(m);
  EXPECT_EQ(e.energy[0], 0.0);
  EXPECT_DOUBLE_EQ(e.energy[1], 3.0);
  EXPECT_NEAR(e.energy[2], std::sqrt(513.0), 1e-12);
}

TEST(PhonemeAverage, Examples) {
  const std::vector<double> abc{1.5, -2.0, 7.0};
  const std::vector<int> ones{1, 1, 1};
  EXPECT_EQ(phoneme_average(abc, ones), abc);
  EXPECT_EQ(phoneme_average(std::vector<double>{1, 3, 5, 7}, std::vector<int>{2, 2}), (std::vector<double>{2, 6}));
  EXPECT_EQ(phoneme_average(std::vector<double>{1, 2, 6}, std::vector<int>{3}), (std::vector<double>{3}));
  EXPECT_EQ(phoneme_average(std::vector<double>{4, 5}, std::vector<int>{0, 2, 0}), (std::vector<double>{0, 4.5, 0}));
  EXPECT_THROW(phoneme_average(std::vector<double>{1, 2}, std::vector<int>{1}), DataError);
}

TEST(PhonemeAverage, ProjectionProperty) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dur(0, 5);
  std::normal_distribution<double> val(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> d(1 + trial % 9);
    for (int& x : d) x = dur(rng);
    int total = 0;
    for (int x : d) total += x;
    std::vector<double> v(static_cast<std::size_t>(total));
    for (double& x : v) x = val(rng);
    const auto once = phoneme_average(v, d);
    const auto again = phoneme_average(expand_by_durations(once, d), d);
    ASSERT_EQ(once.size(), again.size());
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(once[i], again[i], 1e-12);
  }
}

TEST(GriffinLim, ErrorDecreasesWithIterations) {
  SignalConfig cfg;
  cfg.sample_rate = 16000;
  cfg.fmax = 8000;
  // Harmonic tone with a gliding fundamental, like the toy corpus.
  Waveform w{std::vector<double>(12000), 16000};
  double phase = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const double f = 150.0 + 100.0 * i / w.samples.size();
    phase += 2.0 * std::numbers::pi * f / 16000.0;
    w.samples[i] = 0.4 * (std::sin(phase) + 0.5 * std::sin(2 * phase) + 0.25 * std::sin(3 * phase));
  }
  const auto mel = mel_spectrogram(w, cfg);
  double prev = INFINITY;
  for (int iters : {0, 4, 16, 48}) {
    const auto y = griffin_lim(mel, cfg, iters, 11);
    const double err = mean_abs_log_error(mel_spectrogram(y, cfg).frames, mel.frames);
    EXPECT_LT(err, prev) << iters;
    prev = err;
  }
}

TEST(GriffinLim, SineRoundTripKeepsPitch) {
  SignalConfig cfg;
  const auto mel = mel_spectrogram(sine(440.0, 1.0), cfg);
  const auto y = griffin_lim(mel, cfg, 32, 3);
  const auto p = estimate_f0(y, cfg);
  std::vector<double> voiced;
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (p.voiced[t]) voiced.push_back(p.f0[t]);
  }
  ASSERT_GT(voiced.size(), p.size() / 2);
  std::nth_element(voiced.begin(), voiced.begin() + voiced.size() / 2, voiced.end());
  EXPECT_NEAR(voiced[voiced.size() / 2], 440.0, 0.05 * 440.0);
}

TEST(GriffinLim, SilenceStaysQuiet) {
  SignalConfig cfg;
  const auto mel = mel_spectrogram(Waveform{std::vector<double>(8000, 0.0), 22050}, cfg);
  for (int iters : {0, 8}) {
    const auto y = griffin_lim(mel, cfg, iters, 5);
    double ss = 0.0;
    for (double s : y.samples) ss += s * s;
    EXPECT_LT(std::sqrt(ss / y.samples.size()), 1e-3);
  }
}

TEST(Signal, Purity) {
  SignalConfig cfg;
  const Waveform w = sine(310.0, 0.5);
  const auto a = spectral_features(w, cfg);
  const auto b = spectral_features(w, cfg);
  EXPECT_EQ(a.mel.frames, b.mel.frames);
  EXPECT_EQ(a.energy.energy, b.energy.energy);
  EXPECT_EQ(estimate_f0(w, cfg).f0, estimate_f0(w, cfg).f0);
}

namespace {
UtteranceFeatures sample_features() {
  UtteranceFeatures f;
  f.id = "utt";
  f.phonemes = {3, 1, 4};
  f.durations = {2, 0, 3};
  f.mel = num::Matrix(5, 4);
  for (std::size_t i = 0; i < f.mel.size(); ++i) f.mel.data()[i] = 0.25 * static_cast<double>(i) - 1.0;
  f.f0 = {100.0, 0.0, 120.5, 130.0, 0.0};
  f.voiced = {1, 0, 1, 1, 0};
  f.energy = {0.1, 0.2, 0.3, 0.4, 0.5};
  f.sample_rate = 16000;
  f.hop_length = 256;
  return f;
}
}  // namespace

TEST(FeatureCache, RoundTrip) {
  const auto f = sample_features();
  const auto path = std::filesystem::temp_directory_path() / "varflow_cache_test.vffc";
  write_feature_cache(path.string(), f);
  const auto g = read_feature_cache(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(g.mel, f.mel);
  EXPECT_EQ(g.f0, f.f0);
  EXPECT_EQ(g.voiced, f.voiced);
  EXPECT_EQ(g.energy, f.energy);
  EXPECT_EQ(g.durations, f.durations);
  EXPECT_EQ(g.phonemes, f.phonemes);
  EXPECT_EQ(g.sample_rate, 16000);
  EXPECT_EQ(g.hop_length, 256u);
}

TEST(FeatureCache, HeaderLayout) {
  const auto bytes = encode_features(sample_features());
  ASSERT_GE(bytes.size(), 25u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "VFFC");
  EXPECT_EQ(bytes[4], kFeatureCacheVersion);
  EXPECT_EQ(bytes[5], 5);  // T, little-endian
  EXPECT_EQ(bytes[9], 4);  // n_mels
  EXPECT_EQ(bytes.size(), 4 + 1 + 5 * 4 + 8 * 20 + 8 * 5 + 5 + 8 * 5 + 4 * 3 + 4 * 3);
}

TEST(FeatureCache, RejectsBadInput) {
  auto bytes = encode_features(sample_features());
  auto wrong_version = bytes;
  wrong_version[4] = 99;
  EXPECT_THROW(decode_features(wrong_version), DataError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(decode_features(truncated), DataError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_features(bad_magic), DataError);

  auto f = sample_features();
  f.energy.pop_back();
  EXPECT_THROW(encode_features(f), DataError);
}
