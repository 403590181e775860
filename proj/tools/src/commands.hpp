#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace varflow::cli {

struct PrepareArgs {
  std::string config;
  std::string out;
  std::string manifest;  // empty: generate the toy corpus described by the config
  unsigned threads = 0;
};

struct TrainArgs {
  std::string config;
  std::string data;  // prepared cache directory
  std::string out;
  std::string resume;
  std::optional<std::int64_t> steps;
  bool quiet = false;
};

struct SynthArgs {
  std::string checkpoint;
  std::string text;
  std::vector<int> phoneme_ids;
  std::optional<double> sigma;
  std::uint64_t seed = 0;
  bool dropout_at_inference = false;
  std::string out;
  std::string wav;
  // control only
  double lambda = 0.0;
  double energy_scale = 1.0;
  std::string mode;
};

struct EvalFfeArgs {
  std::string checkpoint;
  std::string data;
  std::vector<double> lambdas;
  std::size_t utterances = 16;
  std::optional<double> sigma;
  std::uint64_t seed = 5;
  std::string out;
};

struct DiversityArgs {
  std::string checkpoint;
  std::string text;
  std::vector<int> phoneme_ids;
  std::vector<double> sigmas{0.0, 0.667};
  std::size_t n = 10;
  bool dropout_at_inference = false;
  std::uint64_t seed = 11;
  std::string out;
};

struct LatentArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
};

struct PlotArgs {
  std::string contours;
  std::string out;
  std::string title = "f0 contours";
};

int run_prepare(const PrepareArgs& a);
int run_train(const TrainArgs& a);
int run_synth(const SynthArgs& a);
int run_control(const SynthArgs& a);
int run_eval_ffe(const EvalFfeArgs& a);
int run_diversity(const DiversityArgs& a);
int run_latents(const LatentArgs& a);
int run_plot(const PlotArgs& a);

/// Lowercase letters map to ids 0..25 (the toy corpus' symbol names).
std::vector<int> text_to_ids(const std::string& text);

}  // namespace varflow::cli
