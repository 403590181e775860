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

#include "varflow/eval/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "varflow/eval/control.hpp"

namespace varflow::eval {

namespace {

std::string lambda_label(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "lambda=%+g", lambda);
  return lambda == 0.0 ? "lambda=0" : buf;
}

signal::PitchContour provided_contour(const model::SynthesisResult& s) {
  return signal::PitchContour::from_hz(s.pitch_hz);
}

}  // namespace

const ResponsivenessRow& ResponsivenessReport::at(double lambda) const {
  for (const auto& r : rows) {
    if (r.lambda == lambda) return r;
  }
  throw std::out_of_range("no responsiveness row for lambda " + std::to_string(lambda));
}

std::string ResponsivenessReport::table() const {
  std::ostringstream out;
  char cell[64];
  std::snprintf(cell, sizeof cell, "%-18s", "model");
  out << cell;
  for (const auto& r : rows) {
    std::snprintf(cell, sizeof cell, " | %11s", lambda_label(r.lambda).c_str());
    out << cell;
  }
  out << "\n";
  std::snprintf(cell, sizeof cell, "%-18s", "");
  out << cell;
  for (std::size_t i = 0; i < rows.size(); ++i) out << " | " << "    FFE (%)";
  out << "\n";
  std::snprintf(cell, sizeof cell, "%-18s", model_label.c_str());
  out << cell;
  for (const auto& r : rows) {
    std::snprintf(cell, sizeof cell, " | %11.2f", r.ffe.ffe_percent);
    out << cell;
  }
  out << "\n";
  return out.str();
}

nlohmann::json ResponsivenessReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"lambda", r.lambda},
                         {"ffe_percent", r.ffe.ffe_percent},
                         {"voicing_error_frames", r.ffe.voicing_error_frames},
                         {"gross_pitch_error_frames", r.ffe.gross_pitch_error_frames},
                         {"total_frames", r.ffe.total_frames},
                         {"expected_ratio", r.expected_ratio},
                         {"measured_ratio", r.measured_ratio}});
  }
  return {{"model", model_label}, {"rows", rows_json}};
}

ResponsivenessReport evaluate_responsiveness(const model::AcousticModel& model,
                                             const std::vector<std::vector<int>>& texts,
                                             const std::vector<double>& lambdas, double sigma, std::uint64_t seed,
                                             const signal::SignalConfig& signal_config,
                                             const MelPitchOptions& pitch_options) {
  ResponsivenessReport report;
  report.model_label = std::string(model::to_string(model.config().mode)) + " (" +
                       std::string(model::to_string(model.config().granularity)) + ")";
  std::vector<double> all = lambdas;
  all.push_back(0.0);

  std::vector<double> base_dominant(texts.size(), 0.0);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto r = controlled_synthesize(model, texts[i], 0.0, sigma, seed + i);
    base_dominant[i] = dominant_frequency(estimate_f0_from_mel(r.synthesis.mel, signal_config, pitch_options));
  }
  for (double lambda : all) {
    ResponsivenessRow row;
    row.lambda = lambda;
    row.expected_ratio = std::exp2(lambda / 12.0);
    double log_ratio = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const auto r = controlled_synthesize(model, texts[i], lambda, sigma, seed + i);
      const auto est = estimate_f0_from_mel(r.synthesis.mel, signal_config, pitch_options);
      row.ffe += compute_ffe(provided_contour(r.synthesis), est);
      const double dom = dominant_frequency(est);
      if (dom > 0.0 && base_dominant[i] > 0.0) {
        log_ratio += std::log(dom / base_dominant[i]);
        ++counted;
      }
    }
    row.measured_ratio = counted ? std::exp(log_ratio / static_cast<double>(counted)) : 0.0;
    report.rows.push_back(row);
  }
  return report;
}

nlohmann::json DiversityReport::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : sets) {
    j.push_back({{"sigma", s.sigma},
                 {"samples", s.f0.size()},
                 {"dispersion", s.dispersion},
                 {"duration_variance", s.duration_variance},
                 {"durations", s.durations}});
  }
  return j;
}

std::string DiversityReport::contour_dump() const {
  std::ostringstream out;
  out << "sigma\tsample\tframe\tf0\n";
  char line[96];
  for (const auto& s : sets) {
    for (std::size_t k = 0; k < s.f0.size(); ++k) {
      for (std::size_t t = 0; t < s.f0[k].size(); ++t) {
        std::snprintf(line, sizeof line, "%.3f\t%zu\t%zu\t%.6f\n", s.sigma, k, t, s.f0[k][t]);
        out << line;
      }
    }
  }
  return out.str();
}

DiversityReport diversity_sample(const model::AcousticModel& model, const std::vector<int>& text,
                                 const std::vector<double>& sigmas, std::size_t n, bool dropout_at_inference,
                                 std::uint64_t seed, const signal::SignalConfig& signal_config,
                                 const MelPitchOptions& pitch_options) {
  DiversityReport report;
  for (double sigma : sigmas) {
    DiversitySet set;
    set.sigma = sigma;
    for (std::size_t k = 0; k < n; ++k) {
      model::SynthesisOptions opt;
      opt.sigma = sigma;
      opt.seed = seed + k;
      opt.dropout_at_inference = dropout_at_inference;
      const auto s = model.synthesize(text, opt);
      set.f0.push_back(estimate_f0_from_mel(s.mel, signal_config, pitch_options).f0);
      set.durations.push_back(s.durations);
    }
    if (n > 1) {
      std::size_t frames = set.f0.front().size();
      for (const auto& c : set.f0) frames = std::min(frames, c.size());
      double total = 0.0;
      for (std::size_t t = 0; t < frames; ++t) {
        // Welford, so identical samples give exactly zero.
        double mean = 0.0, m2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double v = set.f0[k][t];
          const double delta = v - mean;
          mean += delta / static_cast<double>(k + 1);
          m2 += delta * (v - mean);
        }
        total += std::sqrt(m2 / static_cast<double>(n));
      }
      set.dispersion = frames ? total / static_cast<double>(frames) : 0.0;

      double dvar = 0.0;
      for (std::size_t i = 0; i < text.size(); ++i) {
        double mean = 0.0;
        for (const auto& d : set.durations) mean += d[i];
        mean /= static_cast<double>(n);
        for (const auto& d : set.durations) dvar += (d[i] - mean) * (d[i] - mean) / static_cast<double>(n);
      }
      set.duration_variance = dvar / static_cast<double>(text.size());
    }
    report.sets.push_back(std::move(set));
  }
  return report;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("correlation needs equal, non-empty inputs");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

nlohmann::json GaussianityReport::to_json() const {
  auto one = [](const LatentStats& s) {
    return nlohmann::json{{"z_mean", s.z_mean},
                          {"z_variance", s.z_variance},
                          {"corr_z_hidden", s.corr_z_hidden},
                          {"corr_x_hidden", s.corr_x_hidden},
                          {"positions", s.positions}};
  };
  return {{"pitch", one(pitch)}, {"energy", one(energy)}};
}

GaussianityReport latent_gaussianity_check(const model::AcousticModel& model,
                                           const std::vector<model::TrainingExample>& data) {
  if (!model.has_flows()) throw std::logic_error("latent diagnostic needs a model with flows");
  std::vector<double> px, pz, ex, ez, h;
  for (const auto& example : data) {
    const auto a = model.analyze_latents(example);
    px.insert(px.end(), a.pitch_x.begin(), a.pitch_x.end());
    pz.insert(pz.end(), a.pitch_z.begin(), a.pitch_z.end());
    ex.insert(ex.end(), a.energy_x.begin(), a.energy_x.end());
    ez.insert(ez.end(), a.energy_z.begin(), a.energy_z.end());
    h.insert(h.end(), a.hidden_norm.begin(), a.hidden_norm.end());
  }
  auto stats = [&](const std::vector<double>& x, const std::vector<double>& z) {
    LatentStats s;
    s.positions = z.size();
    if (z.empty()) return s;
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(z.size());
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    s.z_mean = mean;
    s.z_variance = var / static_cast<double>(z.size());
    s.corr_z_hidden = correlation(z, h);
    s.corr_x_hidden = correlation(x, h);
    return s;
  };
  GaussianityReport r;
  r.pitch = stats(px, pz);
  r.energy = stats(ex, ez);
  return r;
}

}  // namespace varflow::eval
