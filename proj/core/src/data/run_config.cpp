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

#include "varflow/data/run_config.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

#include "varflow/errors.hpp"
#include "varflow/util/binary_io.hpp"
#include "varflow/util/strict_json.hpp"

namespace varflow::data {

using nlohmann::json;

namespace {

json signal_json(const signal::SignalConfig& s) {
  return {{"sample_rate", s.sample_rate}, {"n_fft", s.n_fft},   {"hop_length", s.hop_length},
          {"n_mels", s.n_mels},           {"fmin", s.fmin},     {"fmax", s.fmax},
          {"f0_min", s.f0_min},           {"f0_max", s.f0_max}, {"voicing_threshold", s.voicing_threshold},
          {"floor_eps", s.floor_eps}};
}

signal::SignalConfig signal_from(io::StrictObject o) {
  signal::SignalConfig s;
  s.sample_rate = o.get<int>("sample_rate");
  s.n_fft = o.get<std::size_t>("n_fft");
  s.hop_length = o.get<std::size_t>("hop_length");
  s.n_mels = o.get<std::size_t>("n_mels");
  s.fmin = o.get<double>("fmin");
  s.fmax = o.get<double>("fmax");
  s.f0_min = o.get<double>("f0_min");
  s.f0_max = o.get<double>("f0_max");
  s.voicing_threshold = o.get<double>("voicing_threshold");
  s.floor_eps = o.get<double>("floor_eps");
  o.finish();
  return s;
}

json model_json(const model::ModelConfig& m) {
  return {{"vocab_size", m.vocab_size},
          {"d_model", m.d_model},
          {"encoder_layers", m.encoder_layers},
          {"decoder_layers", m.decoder_layers},
          {"heads", m.heads},
          {"ff_hidden", m.ff_hidden},
          {"kernel", m.kernel},
          {"dropout", m.dropout},
          {"predictor_hidden", m.predictor_hidden},
          {"predictor_kernel", m.predictor_kernel},
          {"n_mels", m.n_mels},
          {"mode", std::string(model::to_string(m.mode))},
          {"granularity", std::string(model::to_string(m.granularity))},
          {"flow_layers", m.flow_layers},
          {"flow_hidden", m.flow_hidden},
          {"flow_kernel", m.flow_kernel},
          {"spline_bins", m.spline_bins},
          {"spline_bound", m.spline_bound}};
}

model::ModelConfig model_from(io::StrictObject o) {
  model::ModelConfig m;
  m.vocab_size = o.get<std::size_t>("vocab_size");
  m.d_model = o.get<std::size_t>("d_model");
  m.encoder_layers = o.get<std::size_t>("encoder_layers");
  m.decoder_layers = o.get<std::size_t>("decoder_layers");
  m.heads = o.get<std::size_t>("heads");
  m.ff_hidden = o.get<std::size_t>("ff_hidden");
  m.kernel = o.get<std::size_t>("kernel");
  m.dropout = o.get<double>("dropout");
  m.predictor_hidden = o.get<std::size_t>("predictor_hidden");
  m.predictor_kernel = o.get<std::size_t>("predictor_kernel");
  m.n_mels = o.get<std::size_t>("n_mels");
  m.mode = model::parse_variance_mode(o.get<std::string>("mode"));
  m.granularity = model::parse_granularity(o.get<std::string>("granularity"));
  m.flow_layers = o.get<std::size_t>("flow_layers");
  m.flow_hidden = o.get<std::size_t>("flow_hidden");
  m.flow_kernel = o.get<std::size_t>("flow_kernel");
  m.spline_bins = o.get<std::size_t>("spline_bins");
  m.spline_bound = o.get<double>("spline_bound");
  o.finish();
  return m;
}

json train_json(const training::TrainConfig& t) {
  return {{"alpha", t.alpha},
          {"batch_size", t.batch_size},
          {"max_steps", t.max_steps},
          {"warmup_steps", t.warmup_steps},
          {"lr_scale", t.lr_scale},
          {"seed", t.seed},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"adam_eps", t.adam_eps},
          {"weight_decay", t.weight_decay},
          {"grad_clip", t.grad_clip},
          {"checkpoint_every", t.checkpoint_every}};
}

training::TrainConfig train_from(io::StrictObject o) {
  training::TrainConfig t;
  t.alpha = o.get<double>("alpha");
  t.batch_size = o.get<std::size_t>("batch_size");
  t.max_steps = o.get<std::int64_t>("max_steps");
  t.warmup_steps = o.get<std::int64_t>("warmup_steps");
  t.lr_scale = o.get<double>("lr_scale");
  t.seed = o.get<std::uint64_t>("seed");
  t.beta1 = o.get<double>("beta1");
  t.beta2 = o.get<double>("beta2");
  t.adam_eps = o.get<double>("adam_eps");
  t.weight_decay = o.get<double>("weight_decay");
  t.grad_clip = o.get<double>("grad_clip");
  t.checkpoint_every = o.get<std::int64_t>("checkpoint_every");
  o.finish();
  return t;
}

}  // namespace

json RunConfig::to_json() const {
  json j = {{"signal", signal_json(signal)},
            {"model", model_json(model)},
            {"train", train_json(train)},
            {"inference", {{"sigma", inference.sigma}, {"griffin_lim_iters", inference.griffin_lim_iters}}}};
  if (corpus) j["corpus"] = corpus->to_json();
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  io::StrictObject root(j, "");
  RunConfig c;
  c.signal = signal_from(root.section("signal"));
  c.model = model_from(root.section("model"));
  c.train = train_from(root.section("train"));
  {
    io::StrictObject inf = root.section("inference");
    c.inference.sigma = inf.get<double>("sigma");
    c.inference.griffin_lim_iters = inf.get<int>("griffin_lim_iters");
    inf.finish();
  }
  if (root.has("corpus")) {
    root.section("corpus");  // marks the key as read
    c.corpus = ToyCorpusSpec::from_json(j.at("corpus"));
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  const auto bytes = io::read_file(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse config " + path + ": " + e.what());
  }
  return from_json(j);
}

void RunConfig::validate() const {
  signal.validate();
  model.validate();
  train.validate();
  if (model.n_mels != signal.n_mels) throw ConfigError("model.n_mels must equal signal.n_mels");
  if (!(inference.sigma >= 0.0)) throw ConfigError("inference.sigma must be non-negative");
  if (inference.griffin_lim_iters < 0) throw ConfigError("inference.griffin_lim_iters must be non-negative");
  if (corpus) {
    corpus->validate();
    if (corpus->sample_rate != signal.sample_rate) throw ConfigError("corpus.sample_rate must equal signal.sample_rate");
    if (corpus->hop_length != signal.hop_length) throw ConfigError("corpus.hop_length must equal signal.hop_length");
    if (corpus->vocab_size > model.vocab_size) throw ConfigError("corpus.vocab_size exceeds model.vocab_size");
  }
}

std::string RunConfig::canonical() const { return to_json().dump(); }

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const std::string& path) {
  const auto bytes = io::read_file(path);
  return sha256_hex(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace varflow::data
