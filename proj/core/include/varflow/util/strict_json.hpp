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

#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "varflow/errors.hpp"

namespace varflow::io {

/// Reads a JSON object field by field and rejects anything left over, so a
/// misspelt key fails loudly instead of falling back to a default.
class StrictObject {
 public:
  StrictObject(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config section '" + path_ + "' must be an object");
  }

  template <class T>
  T get(const std::string& key) {
    const std::string full = qualified(key);
    if (!j_.contains(key)) throw ConfigError("missing config key '" + full + "'");
    used_.insert(key);
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key '" + full + "' has the wrong type");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  StrictObject section(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError("missing config section '" + qualified(key) + "'");
    used_.insert(key);
    return StrictObject(j_.at(key), qualified(key));
  }

  /// Throws on the first key that was never read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError("unknown config key '" + qualified(it.key()) + "'");
    }
  }

 private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace varflow::io
