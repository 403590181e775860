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

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace varflow::data {

struct ManifestEntry {
  std::string id;
  std::string audio;  // path relative to the manifest directory
  std::vector<int> phonemes;
  std::vector<int> durations;
  int sample_rate = 0;
  std::vector<double> phoneme_f0;  // optional reference pitch per phoneme

  nlohmann::json to_json() const;
  static ManifestEntry from_json(const nlohmann::json& j);
};

/// One JSON object per line. Throws DataError on malformed lines or
/// duplicate ids.
std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

}  // namespace varflow::data
