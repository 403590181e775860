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

#include "varflow/data/toy_corpus.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include "varflow/data/wav.hpp"
#include "varflow/errors.hpp"
#include "varflow/util/strict_json.hpp"

namespace varflow::data {

void ToyCorpusSpec::validate() const {
  auto need = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(std::string("corpus.") + field + " " + what);
  };
  need(vocab_size >= 1, "vocab_size", "must be positive");
  need(utterances >= 1, "utterances", "must be positive");
  need(min_phonemes >= 1 && min_phonemes <= max_phonemes, "min_phonemes", "must be in [1, max_phonemes]");
  need(min_duration >= 1 && min_duration <= max_duration, "min_duration", "must be in [1, max_duration]");
  need(f0_low > 0.0 && f0_low <= f0_high, "f0_low", "must be positive and at most f0_high");
  need(utterance_jitter >= 0.0 && utterance_jitter < 0.5, "utterance_jitter", "must be in [0, 0.5)");
  need(phoneme_jitter >= 0.0 && phoneme_jitter < 0.5, "phoneme_jitter", "must be in [0, 0.5)");
  need(gain_jitter >= 0.0 && gain_jitter < 1.0, "gain_jitter", "must be in [0, 1)");
  need(sample_rate > 0, "sample_rate", "must be positive");
  need(hop_length > 0, "hop_length", "must be positive");
  need(f0_high * (1.0 + utterance_jitter) * (1.0 + phoneme_jitter) * 3.0 < sample_rate / 2.0, "f0_high",
       "puts the third harmonic above Nyquist");
}

std::vector<ToySymbol> ToyCorpusSpec::symbols() const {
  std::vector<ToySymbol> out(vocab_size);
  std::mt19937_64 rng(seed ^ 0xA5A5A5A5ULL);
  std::uniform_real_distribution<double> amp(0.25, 0.6);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    const double u = vocab_size == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(vocab_size - 1);
    out[i].base_f0 = f0_low * std::pow(f0_high / f0_low, u);
    out[i].amplitude = amp(rng);
  }
  // Interleave pitch order so neighbouring ids are not neighbouring pitches.
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

nlohmann::json ToyCorpusSpec::to_json() const {
  return {{"vocab_size", vocab_size},
          {"utterances", utterances},
          {"min_phonemes", min_phonemes},
          {"max_phonemes", max_phonemes},
          {"min_duration", min_duration},
          {"max_duration", max_duration},
          {"f0_low", f0_low},
          {"f0_high", f0_high},
          {"utterance_jitter", utterance_jitter},
          {"phoneme_jitter", phoneme_jitter},
          {"gain_jitter", gain_jitter},
          {"sample_rate", sample_rate},
          {"hop_length", hop_length},
          {"seed", seed}};
}

ToyCorpusSpec ToyCorpusSpec::from_json(const nlohmann::json& j) {
  io::StrictObject o(j, "corpus");
  ToyCorpusSpec s;
  s.vocab_size = o.get<std::size_t>("vocab_size");
  s.utterances = o.get<std::size_t>("utterances");
  s.min_phonemes = o.get<std::size_t>("min_phonemes");
  s.max_phonemes = o.get<std::size_t>("max_phonemes");
  s.min_duration = o.get<int>("min_duration");
  s.max_duration = o.get<int>("max_duration");
  s.f0_low = o.get<double>("f0_low");
  s.f0_high = o.get<double>("f0_high");
  s.utterance_jitter = o.get<double>("utterance_jitter");
  s.phoneme_jitter = o.get<double>("phoneme_jitter");
  s.gain_jitter = o.get<double>("gain_jitter");
  s.sample_rate = o.get<int>("sample_rate");
  s.hop_length = o.get<std::size_t>("hop_length");
  s.seed = o.get<std::uint64_t>("seed");
  o.finish();
  return s;
}

std::vector<ToyUtterance> generate_toy_corpus(const ToyCorpusSpec& spec) {
  spec.validate();
  const std::vector<ToySymbol> symbols = spec.symbols();
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> length(spec.min_phonemes, spec.max_phonemes);
  std::uniform_int_distribution<int> symbol(0, static_cast<int>(spec.vocab_size) - 1);
  std::uniform_int_distribution<int> duration(spec.min_duration, spec.max_duration);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double rate = static_cast<double>(spec.sample_rate);

  std::vector<ToyUtterance> out;
  for (std::size_t u = 0; u < spec.utterances; ++u) {
    ToyUtterance utt;
    char id[32];
    std::snprintf(id, sizeof id, "toy_%04zu", u);
    utt.entry.id = id;
    utt.entry.audio = std::string("wav/") + id + ".wav";
    utt.entry.sample_rate = spec.sample_rate;
    const std::size_t n = length(rng);
    const double scale = 1.0 + spec.utterance_jitter * unit(rng);
    const double gain = 1.0 + spec.gain_jitter * unit(rng);
    for (std::size_t i = 0; i < n; ++i) {
      utt.entry.phonemes.push_back(symbol(rng));
      utt.entry.durations.push_back(duration(rng));
      const auto& sym = symbols[static_cast<std::size_t>(utt.entry.phonemes.back())];
      utt.phoneme_f0.push_back(sym.base_f0 * scale * (1.0 + spec.phoneme_jitter * unit(rng)));
    }
    utt.entry.phoneme_f0 = utt.phoneme_f0;

    std::size_t total_frames = 0;
    for (int d : utt.entry.durations) total_frames += static_cast<std::size_t>(d);
    utt.audio.sample_rate = spec.sample_rate;
    utt.audio.samples.resize(spec.hop_length * total_frames - 1);
    double phase = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& sym = symbols[static_cast<std::size_t>(utt.entry.phonemes[i])];
      const std::size_t end = std::min(utt.audio.samples.size(),
                                        pos + spec.hop_length * static_cast<std::size_t>(utt.entry.durations[i]));
      const double step = 2.0 * std::numbers::pi * utt.phoneme_f0[i] / rate;
      const double a = sym.amplitude * gain;
      for (; pos < end; ++pos) {
        double s = 0.0;
        for (std::size_t h = 0; h < sym.harmonics.size(); ++h) {
          s += sym.harmonics[h] * std::sin(static_cast<double>(h + 1) * phase);
        }
        utt.audio.samples[pos] = a * s / 1.75;
        phase += step;
        if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
      }
    }
    out.push_back(std::move(utt));
  }
  return out;
}

std::string write_toy_corpus(const ToyCorpusSpec& spec, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "wav");
  std::vector<ManifestEntry> entries;
  for (const auto& utt : generate_toy_corpus(spec)) {
    write_wav((fs::path(dir) / utt.entry.audio).string(), utt.audio);
    entries.push_back(utt.entry);
  }
  const std::string manifest = (fs::path(dir) / "manifest.jsonl").string();
  write_manifest(manifest, entries);
  return manifest;
}

}  // namespace varflow::data
