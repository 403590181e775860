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

#include "varflow/data/prepare.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include "varflow/data/manifest.hpp"
#include "varflow/data/wav.hpp"
#include "varflow/errors.hpp"
#include "varflow/signal/pitch.hpp"
#include "varflow/util/binary_io.hpp"

namespace varflow::data {

namespace fs = std::filesystem;

signal::UtteranceFeatures extract_features(const signal::Waveform& w, const signal::SignalConfig& config,
                                           std::vector<int> phonemes, std::vector<int> durations, std::string id) {
  const signal::SpectralFeatures spec = signal::spectral_features(w, config);
  const signal::PitchContour pitch = signal::estimate_f0(w, config);
  signal::UtteranceFeatures f;
  f.id = std::move(id);
  f.phonemes = std::move(phonemes);
  f.durations = std::move(durations);
  f.mel = spec.mel.frames;
  f.f0 = pitch.f0;
  f.voiced = pitch.voiced;
  f.energy = spec.energy.energy;
  f.sample_rate = config.sample_rate;
  f.hop_length = static_cast<std::uint32_t>(config.hop_length);
  return f;
}

model::NormalizationStats compute_stats(const std::vector<signal::UtteranceFeatures>& corpus) {
  if (corpus.empty()) throw DataError("cannot compute statistics over an empty corpus");
  const std::size_t n_mels = corpus.front().mel.cols();
  double p_sum = 0.0, p_sq = 0.0, e_sum = 0.0, e_sq = 0.0;
  std::size_t p_n = 0, frames = 0;
  std::vector<double> mel_sum(n_mels, 0.0);
  for (const auto& f : corpus) {
    if (f.mel.cols() != n_mels) throw DataError("utterances disagree on n_mels");
    for (std::size_t t = 0; t < f.frames(); ++t) {
      if (f.voiced[t] && f.f0[t] > 0.0) {
        const double lp = std::log(f.f0[t]);
        p_sum += lp;
        p_sq += lp * lp;
        ++p_n;
      }
      e_sum += f.energy[t];
      e_sq += f.energy[t] * f.energy[t];
      for (std::size_t j = 0; j < n_mels; ++j) mel_sum[j] += f.mel(t, j);
    }
    frames += f.frames();
  }
  if (p_n == 0) throw DataError("corpus has no voiced frames");
  model::NormalizationStats s;
  auto std_of = [](double sum, double sq, std::size_t n) {
    const double mean = sum / static_cast<double>(n);
    return std::sqrt(std::max(sq / static_cast<double>(n) - mean * mean, 1e-12));
  };
  s.pitch_mean = p_sum / static_cast<double>(p_n);
  s.pitch_std = std_of(p_sum, p_sq, p_n);
  s.energy_mean = e_sum / static_cast<double>(frames);
  s.energy_std = std_of(e_sum, e_sq, frames);
  s.mel_mean.resize(n_mels);
  for (std::size_t j = 0; j < n_mels; ++j) s.mel_mean[j] = mel_sum[j] / static_cast<double>(frames);
  double dev = 0.0;
  for (const auto& f : corpus) {
    for (std::size_t t = 0; t < f.frames(); ++t) {
      for (std::size_t j = 0; j < n_mels; ++j) {
        const double d = f.mel(t, j) - s.mel_mean[j];
        dev += d * d;
      }
    }
  }
  s.mel_std = std::sqrt(std::max(dev / static_cast<double>(frames * n_mels), 1e-12));

  // Second pass for the pitch/energy centre so standardized means vanish to
  // rounding rather than to the one-pass formula's cancellation error.
  double p_dev = 0.0, e_dev = 0.0;
  for (const auto& f : corpus) {
    for (std::size_t t = 0; t < f.frames(); ++t) {
      if (f.voiced[t] && f.f0[t] > 0.0) p_dev += std::log(f.f0[t]) - s.pitch_mean;
      e_dev += f.energy[t] - s.energy_mean;
    }
  }
  s.pitch_mean += p_dev / static_cast<double>(p_n);
  s.energy_mean += e_dev / static_cast<double>(frames);
  return s;
}

PrepareReport prepare(const std::string& manifest_path, const signal::SignalConfig& config, const std::string& out_dir,
                      unsigned threads) {
  config.validate();
  const std::vector<ManifestEntry> entries = read_manifest(manifest_path);
  if (entries.empty()) throw DataError("manifest " + manifest_path + " is empty");
  const fs::path base = fs::path(manifest_path).parent_path();
  fs::create_directories(out_dir);

  struct Outcome {
    std::optional<signal::UtteranceFeatures> features;
    std::string reason;
  };
  std::vector<Outcome> outcomes(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      const ManifestEntry& e = entries[i];
      Outcome& o = outcomes[i];
      try {
        const signal::Waveform w = read_wav((base / e.audio).string());
        if (w.sample_rate != config.sample_rate) {
          o.reason = "sample rate " + std::to_string(w.sample_rate) + " differs from configured " +
                     std::to_string(config.sample_rate);
          continue;
        }
        signal::UtteranceFeatures f = extract_features(w, config, e.phonemes, e.durations, e.id);
        long total = 0;
        for (int d : f.durations) total += d;
        if (total != static_cast<long>(f.frames())) {
          o.reason = "durations sum to " + std::to_string(total) + " but audio has " + std::to_string(f.frames()) +
                     " frames";
          continue;
        }
        if (std::none_of(f.voiced.begin(), f.voiced.end(), [](std::uint8_t v) { return v != 0; })) {
          o.reason = "no voiced frames";
          continue;
        }
        o.features = std::move(f);
      } catch (const std::exception& ex) {
        o.reason = ex.what();
      }
    }
  };
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(threads ? threads : std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(entries.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  PrepareReport report;
  std::vector<signal::UtteranceFeatures> kept;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (outcomes[i].features) {
      signal::write_feature_cache((fs::path(out_dir) / (entries[i].id + ".vffc")).string(), *outcomes[i].features);
      report.accepted.push_back(entries[i].id);
      kept.push_back(std::move(*outcomes[i].features));
    } else {
      report.rejected.emplace_back(entries[i].id, outcomes[i].reason);
    }
  }
  if (kept.empty()) throw DataError("every utterance was rejected");
  report.stats = compute_stats(kept);
  std::ofstream(fs::path(out_dir) / "stats.json") << report.stats.to_json().dump(2) << '\n';
  return report;
}

std::vector<signal::UtteranceFeatures> load_cache_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("feature cache directory " + dir + " does not exist");
  std::vector<std::string> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".vffc") paths.push_back(e.path().string());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<signal::UtteranceFeatures> out;
  for (const auto& p : paths) out.push_back(signal::read_feature_cache(p));
  if (out.empty()) throw DataError("no feature cache files in " + dir);
  return out;
}

model::NormalizationStats load_stats(const std::string& path) {
  const auto bytes = io::read_file(path);
  try {
    return model::NormalizationStats::from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("cannot parse " + path + ": " + e.what());
  }
}

}  // namespace varflow::data
