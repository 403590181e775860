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

#include "varflow/training/checkpoint.hpp"

#include <filesystem>
#include <map>
#include <system_error>

#include "varflow/errors.hpp"
#include "varflow/util/binary_io.hpp"

namespace varflow::training {

namespace {

constexpr char kMagic[] = "VFCK";
constexpr std::uint8_t kArray = 0, kInt = 1, kBytes = 2;

void put_array(io::ByteWriter& w, const std::string& name, const NamedArray& a) {
  w.put_string(name);
  w.put(kArray);
  w.put(a.rows);
  w.put(a.cols);
  w.put_array<double>(a.values);
}

void put_int(io::ByteWriter& w, const std::string& name, std::int64_t v) {
  w.put_string(name);
  w.put(kInt);
  w.put(v);
}

void put_text(io::ByteWriter& w, const std::string& name, const std::string& s) {
  w.put_string(name);
  w.put(kBytes);
  w.put_string(s);
}

std::vector<NamedArray> snapshot(const num::ParameterSet& params) {
  std::vector<NamedArray> out;
  for (const auto& e : params) {
    out.push_back({e.name, static_cast<std::uint32_t>(e.tensor.rows()), static_cast<std::uint32_t>(e.tensor.cols()),
                   {e.tensor.values().begin(), e.tensor.values().end()}});
  }
  return out;
}

std::vector<NamedArray> moments(const num::ParameterSet& params, const std::vector<std::vector<double>>& buf) {
  std::vector<NamedArray> out = snapshot(params);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].values = buf[i];
  return out;
}

void check_layout(const std::vector<NamedArray>& arrays, const num::ParameterSet& params, const char* what) {
  if (arrays.size() != params.size()) {
    throw DataError(std::string("checkpoint ") + what + " has " + std::to_string(arrays.size()) +
                    " tensors, model expects " + std::to_string(params.size()));
  }
  std::size_t i = 0;
  for (const auto& e : params) {
    const NamedArray& a = arrays[i++];
    if (a.name != e.name || a.rows != e.tensor.rows() || a.cols != e.tensor.cols()) {
      throw DataError(std::string("checkpoint ") + what + " entry '" + a.name + "' (" + std::to_string(a.rows) +
                      "x" + std::to_string(a.cols) + ") does not match model parameter '" + e.name + "' (" +
                      std::to_string(e.tensor.rows()) + "x" + std::to_string(e.tensor.cols()) + ")");
    }
  }
}

}  // namespace

Checkpoint capture(const model::AcousticModel& model, const AdamW* optimizer, std::int64_t step,
                   std::string config_json) {
  Checkpoint ck;
  ck.config_json = std::move(config_json);
  ck.stats = model.stats();
  ck.step = step;
  ck.parameters = snapshot(model.parameters());
  if (optimizer != nullptr) {
    ck.has_optimizer = true;
    ck.optimizer_steps = optimizer->steps();
    ck.first_moments = moments(model.parameters(), optimizer->first_moments());
    ck.second_moments = moments(model.parameters(), optimizer->second_moments());
  }
  return ck;
}

void restore(const Checkpoint& ck, model::AcousticModel& model, AdamW* optimizer) {
  check_layout(ck.parameters, model.parameters(), "parameters");
  if (optimizer != nullptr) {
    if (!ck.has_optimizer) throw DataError("checkpoint carries no optimizer state");
    check_layout(ck.first_moments, model.parameters(), "first moments");
    check_layout(ck.second_moments, model.parameters(), "second moments");
  }
  std::size_t i = 0;
  for (auto& e : model.parameters()) {
    auto dst = e.tensor.mutable_values();
    std::copy(ck.parameters[i].values.begin(), ck.parameters[i].values.end(), dst.begin());
    ++i;
  }
  if (ck.stats.initialized()) model.set_stats(ck.stats);
  if (optimizer != nullptr) {
    for (std::size_t j = 0; j < ck.first_moments.size(); ++j) {
      optimizer->first_moments()[j] = ck.first_moments[j].values;
      optimizer->second_moments()[j] = ck.second_moments[j].values;
    }
    optimizer->set_steps(ck.optimizer_steps);
  }
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  io::ByteWriter w;
  w.put_bytes(kMagic);
  w.put(kCheckpointVersion);
  w.put(static_cast<std::uint32_t>(4 + ck.parameters.size() + ck.first_moments.size() + ck.second_moments.size() +
                                   (ck.has_optimizer ? 1 : 0)));
  put_text(w, "config", ck.config_json);
  put_text(w, "stats", ck.stats.initialized() ? ck.stats.to_json().dump() : std::string());
  put_int(w, "step", ck.step);
  put_int(w, "optimizer.present", ck.has_optimizer ? 1 : 0);
  for (const auto& a : ck.parameters) put_array(w, "param/" + a.name, a);
  if (ck.has_optimizer) {
    put_int(w, "optimizer.steps", ck.optimizer_steps);
    for (const auto& a : ck.first_moments) put_array(w, "adam.m/" + a.name, a);
    for (const auto& a : ck.second_moments) put_array(w, "adam.v/" + a.name, a);
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes, "checkpoint");
  if (r.get_bytes(4) != kMagic) throw DataError("not a checkpoint file (bad magic)");
  const auto version = r.get<std::uint8_t>();
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ck;
  const auto entries = r.get<std::uint32_t>();
  std::map<std::string, std::int64_t> ints;
  for (std::uint32_t i = 0; i < entries; ++i) {
    const std::string name = r.get_string();
    const auto kind = r.get<std::uint8_t>();
    if (kind == kArray) {
      NamedArray a;
      a.rows = r.get<std::uint32_t>();
      a.cols = r.get<std::uint32_t>();
      a.values = r.get_array<double>(static_cast<std::size_t>(a.rows) * a.cols);
      const auto slash = name.find('/');
      if (slash == std::string::npos) throw DataError("checkpoint array '" + name + "' has no group");
      const std::string group = name.substr(0, slash);
      a.name = name.substr(slash + 1);
      if (group == "param") {
        ck.parameters.push_back(std::move(a));
      } else if (group == "adam.m") {
        ck.first_moments.push_back(std::move(a));
      } else if (group == "adam.v") {
        ck.second_moments.push_back(std::move(a));
      } else {
        throw DataError("checkpoint has unknown array group '" + group + "'");
      }
    } else if (kind == kInt) {
      ints[name] = r.get<std::int64_t>();
    } else if (kind == kBytes) {
      const std::string s = r.get_string();
      if (name == "config") {
        ck.config_json = s;
      } else if (name == "stats") {
        if (!s.empty()) ck.stats = model::NormalizationStats::from_json(nlohmann::json::parse(s));
      } else {
        throw DataError("checkpoint has unknown entry '" + name + "'");
      }
    } else {
      throw DataError("checkpoint entry '" + name + "' has unknown kind " + std::to_string(kind));
    }
  }
  if (r.remaining() != 0) throw DataError("checkpoint has trailing bytes");
  if (!ints.count("step")) throw DataError("checkpoint lacks a step counter");
  ck.step = ints["step"];
  ck.has_optimizer = ints["optimizer.present"] != 0;
  ck.optimizer_steps = ints.count("optimizer.steps") ? ints["optimizer.steps"] : 0;
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  const std::string tmp = path + ".tmp";
  io::write_file(tmp, encode_checkpoint(ck));
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move checkpoint into place at " + path + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(io::read_file(path)); }

}  // namespace varflow::training
