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

#include "varflow/data/manifest.hpp"

#include <fstream>
#include <set>

#include "varflow/errors.hpp"

namespace varflow::data {

nlohmann::json ManifestEntry::to_json() const {
  nlohmann::json j = {{"id", id},
                      {"audio", audio},
                      {"phonemes", phonemes},
                      {"durations", durations},
                      {"sample_rate", sample_rate}};
  if (!phoneme_f0.empty()) j["phoneme_f0"] = phoneme_f0;
  return j;
}

ManifestEntry ManifestEntry::from_json(const nlohmann::json& j) {
  ManifestEntry e;
  try {
    e.id = j.at("id").get<std::string>();
    e.audio = j.at("audio").get<std::string>();
    e.phonemes = j.at("phonemes").get<std::vector<int>>();
    e.durations = j.at("durations").get<std::vector<int>>();
    e.sample_rate = j.at("sample_rate").get<int>();
    if (j.contains("phoneme_f0")) e.phoneme_f0 = j.at("phoneme_f0").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed manifest entry: ") + ex.what());
  }
  if (e.id.empty()) throw DataError("manifest entry with empty id");
  if (e.phonemes.size() != e.durations.size()) throw DataError("manifest entry '" + e.id + "': phoneme/duration count mismatch");
  for (int d : e.durations) {
    if (d < 1) throw DataError("manifest entry '" + e.id + "': durations must be positive");
  }
  return e;
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path);
  std::vector<ManifestEntry> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
    ManifestEntry e = ManifestEntry::from_json(j);
    if (!ids.insert(e.id).second) throw DataError(path + ": duplicate utterance id '" + e.id + "'");
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest " + path);
  for (const auto& e : entries) out << e.to_json().dump() << '\n';
}

}  // namespace varflow::data
