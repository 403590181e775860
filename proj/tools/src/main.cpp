// varflow command-line tool.
//
// Exit codes: 0 success, 1 usage, 2 data or configuration problem,
// 3 numerical failure (diverged training).

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "varflow/errors.hpp"

namespace {

void add_text_options(CLI::App* cmd, std::string& text, std::vector<int>& ids) {
  auto* t = cmd->add_option("--text", text, "Toy symbols as lowercase letters (a = id 0)");
  auto* p = cmd->add_option("--phoneme-ids", ids, "Comma-separated phoneme ids")->delimiter(',');
  t->excludes(p);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace varflow::cli;
  CLI::App app{"Variance-flow acoustic model: data preparation, training, synthesis and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "varflow 0.1.0");

  PrepareArgs prep;
  auto* prepare = app.add_subcommand("prepare", "Extract features (generating the toy corpus when no manifest is given)");
  prepare->add_option("--config", prep.config, "Run configuration JSON")->required()->check(CLI::ExistingFile);
  prepare->add_option("--out", prep.out, "Output directory (cache/ and run.json are written here)")->required();
  prepare->add_option("--manifest", prep.manifest, "Utterance manifest (JSON lines)")->check(CLI::ExistingFile);
  prepare->add_option("--threads", prep.threads, "Worker threads (0 = hardware concurrency)");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a prepared feature cache");
  train_cmd->add_option("--config", train.config, "Run configuration JSON")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--data", train.data, "Feature cache directory from prepare")->required();
  train_cmd->add_option("--out", train.out, "Run directory (metrics.jsonl, checkpoint.vfck, run.json)")->required();
  train_cmd->add_option("--resume", train.resume, "Continue from this checkpoint")->check(CLI::ExistingFile);
  train_cmd->add_option("--steps", train.steps, "Override train.max_steps");
  train_cmd->add_flag("--quiet", train.quiet, "No progress lines");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize a mel spectrogram");
  synth_cmd->add_option("--checkpoint", synth.checkpoint)->required()->check(CLI::ExistingFile);
  add_text_options(synth_cmd, synth.text, synth.phoneme_ids);
  synth_cmd->add_option("--sigma", synth.sigma, "Latent standard deviation (default: inference.sigma)");
  synth_cmd->add_option("--seed", synth.seed, "Sampling seed");
  synth_cmd->add_flag("--dropout-at-inference", synth.dropout_at_inference, "Keep encoder dropout active");
  synth_cmd->add_option("--out", synth.out, "Mel output (.npy, float32, frames x bands)")->required();
  synth_cmd->add_option("--wav", synth.wav, "Also write a Griffin-Lim waveform");

  SynthArgs ctrl;
  auto* control = app.add_subcommand("control", "Synthesize with the pitch shifted by lambda semitones");
  control->add_option("--checkpoint", ctrl.checkpoint)->required()->check(CLI::ExistingFile);
  add_text_options(control, ctrl.text, ctrl.phoneme_ids);
  control->add_option("--lambda", ctrl.lambda, "Pitch shift in semitones")->required();
  control->add_option("--energy-scale", ctrl.energy_scale, "Multiplier on raw energy");
  control->add_option("--mode", ctrl.mode, "Expected variance mode of the checkpoint")
      ->check(CLI::IsMember({"flow", "reversed", "mse"}));
  control->add_option("--sigma", ctrl.sigma, "Latent standard deviation (default: inference.sigma)");
  control->add_option("--seed", ctrl.seed, "Sampling seed");
  control->add_option("--out", ctrl.out, "Mel output (.npy)")->required();
  control->add_option("--wav", ctrl.wav, "Also write a Griffin-Lim waveform");

  EvalFfeArgs ffe;
  auto* ffe_cmd = app.add_subcommand("eval-ffe", "FFE between provided and generated pitch for a grid of shifts");
  ffe_cmd->add_option("--checkpoint", ffe.checkpoint)->required()->check(CLI::ExistingFile);
  ffe_cmd->add_option("--data", ffe.data, "Feature cache directory supplying the test texts")->required();
  ffe_cmd->add_option("--lambdas", ffe.lambdas, "Shifts in semitones (default -6,-4,-2,2,4,6)")->delimiter(',');
  ffe_cmd->add_option("--utterances", ffe.utterances, "Number of texts from the cache");
  ffe_cmd->add_option("--sigma", ffe.sigma);
  ffe_cmd->add_option("--seed", ffe.seed);
  ffe_cmd->add_option("--out", ffe.out, "Report JSON")->required();

  DiversityArgs div;
  auto* div_cmd = app.add_subcommand("diversity", "Sample repeatedly and dump f0 contours");
  div_cmd->add_option("--checkpoint", div.checkpoint)->required()->check(CLI::ExistingFile);
  add_text_options(div_cmd, div.text, div.phoneme_ids);
  div_cmd->add_option("--sigmas", div.sigmas, "Latent standard deviations")->delimiter(',');
  div_cmd->add_option("--n", div.n, "Samples per sigma");
  div_cmd->add_flag("--dropout-at-inference", div.dropout_at_inference);
  div_cmd->add_option("--seed", div.seed);
  div_cmd->add_option("--out", div.out, "Contour dump (tab-separated)")->required();

  LatentArgs lat;
  auto* lat_cmd = app.add_subcommand("latents", "Latent statistics and their correlation with the conditioning");
  lat_cmd->add_option("--checkpoint", lat.checkpoint)->required()->check(CLI::ExistingFile);
  lat_cmd->add_option("--data", lat.data)->required();
  lat_cmd->add_option("--out", lat.out, "Report JSON")->required();

  PlotArgs plot;
  auto* plot_cmd = app.add_subcommand("plot", "Render a contour dump as an SVG overlay");
  plot_cmd->add_option("--contours", plot.contours)->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", plot.out, "SVG file")->required();
  plot_cmd->add_option("--title", plot.title);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*prepare) return run_prepare(prep);
    if (*train_cmd) return run_train(train);
    if (*synth_cmd) return run_synth(synth);
    if (*control) return run_control(ctrl);
    if (*ffe_cmd) return run_eval_ffe(ffe);
    if (*div_cmd) return run_diversity(div);
    if (*lat_cmd) return run_latents(lat);
    if (*plot_cmd) return run_plot(plot);
  } catch (const varflow::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
