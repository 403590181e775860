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

#include "varflow/signal/feature_cache.hpp"

#include <filesystem>
#include <string>

#include "varflow/errors.hpp"
#include "varflow/util/binary_io.hpp"

namespace varflow::signal {

namespace {
constexpr char kMagic[] = "VFFC";
}

void UtteranceFeatures::validate() const {
  const std::size_t t = frames();
  if (f0.size() != t || voiced.size() != t || energy.size() != t) {
    throw DataError("utterance '" + id + "': mel, f0, voicing and energy lengths differ");
  }
  if (phonemes.size() != durations.size()) {
    throw DataError("utterance '" + id + "': phoneme and duration counts differ");
  }
  long total = 0;
  for (int d : durations) {
    if (d < 0) throw DataError("utterance '" + id + "': negative duration");
    total += d;
  }
  if (total != static_cast<long>(t)) {
    throw DataError("utterance '" + id + "': durations sum to " + std::to_string(total) + " but there are " +
                    std::to_string(t) + " frames");
  }
}

std::vector<std::uint8_t> encode_features(const UtteranceFeatures& f) {
  f.validate();
  io::ByteWriter w;
  w.put_bytes(kMagic);
  w.put(kFeatureCacheVersion);
  w.put(static_cast<std::uint32_t>(f.frames()));
  w.put(static_cast<std::uint32_t>(f.mel.cols()));
  w.put(static_cast<std::uint32_t>(f.phonemes.size()));
  w.put(static_cast<std::uint32_t>(f.sample_rate));
  w.put(f.hop_length);
  w.put_array<double>(f.mel.data());
  w.put_array<double>(f.f0);
  w.put_array<std::uint8_t>(f.voiced);
  w.put_array<double>(f.energy);
  for (int d : f.durations) w.put(static_cast<std::int32_t>(d));
  for (int p : f.phonemes) w.put(static_cast<std::int32_t>(p));
  return w.take();
}

UtteranceFeatures decode_features(std::span<const std::uint8_t> bytes, std::string id) {
  io::ByteReader r(bytes, "feature cache" + (id.empty() ? std::string() : " '" + id + "'"));
  if (r.get_bytes(4) != kMagic) throw DataError("not a feature cache file (bad magic)");
  const auto version = r.get<std::uint8_t>();
  if (version != kFeatureCacheVersion) {
    throw DataError("unsupported feature cache version " + std::to_string(version) + " (expected " +
                    std::to_string(kFeatureCacheVersion) + ")");
  }
  UtteranceFeatures f;
  f.id = std::move(id);
  const auto frames = r.get<std::uint32_t>();
  const auto n_mels = r.get<std::uint32_t>();
  const auto n_phon = r.get<std::uint32_t>();
  f.sample_rate = static_cast<int>(r.get<std::uint32_t>());
  f.hop_length = r.get<std::uint32_t>();
  f.mel = num::Matrix(frames, n_mels, r.get_array<double>(static_cast<std::size_t>(frames) * n_mels));
  f.f0 = r.get_array<double>(frames);
  f.voiced = r.get_array<std::uint8_t>(frames);
  f.energy = r.get_array<double>(frames);
  for (std::int32_t d : r.get_array<std::int32_t>(n_phon)) f.durations.push_back(d);
  for (std::int32_t p : r.get_array<std::int32_t>(n_phon)) f.phonemes.push_back(p);
  if (r.remaining() != 0) throw DataError("feature cache has trailing bytes");
  f.validate();
  return f;
}

void write_feature_cache(const std::string& path, const UtteranceFeatures& f) {
  io::write_file(path, encode_features(f));
}

UtteranceFeatures read_feature_cache(const std::string& path) {
  return decode_features(io::read_file(path), std::filesystem::path(path).stem().string());
}

}  // namespace varflow::signal
