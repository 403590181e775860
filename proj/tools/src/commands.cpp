#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "npy.hpp"
#include "svg_plot.hpp"
#include "varflow/data/prepare.hpp"
#include "varflow/data/run_config.hpp"
#include "varflow/data/session.hpp"
#include "varflow/data/toy_corpus.hpp"
#include "varflow/data/wav.hpp"
#include "varflow/errors.hpp"
#include "varflow/eval/control.hpp"
#include "varflow/eval/reports.hpp"
#include "varflow/signal/griffin_lim.hpp"
#include "varflow/training/trainer.hpp"

namespace varflow::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

void ensure_parent(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// Enough to rerun the command and get the same bytes.
void write_run_metadata(const fs::path& path, const std::string& command, json details) {
  details["command"] = command;
  write_text(path, details.dump(2) + "\n");
}

json checkpoint_provenance(const std::string& checkpoint, const data::TrainedModel& tm) {
  return {{"checkpoint", checkpoint},
          {"checkpoint_sha256", data::sha256_file(checkpoint)},
          {"checkpoint_step", tm.step},
          {"config_sha256", data::sha256_hex(tm.config.canonical())}};
}

std::vector<int> resolve_ids(const std::string& text, const std::vector<int>& ids, const model::ModelConfig& cfg) {
  if (text.empty() == ids.empty()) throw ConfigError("give exactly one of --text or --phoneme-ids");
  auto out = ids.empty() ? text_to_ids(text) : ids;
  for (int id : out) {
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
      throw DataError("phoneme id " + std::to_string(id) + " is outside the model vocabulary (size " +
                      std::to_string(cfg.vocab_size) + ")");
    }
  }
  return out;
}

void maybe_write_wav(const std::string& path, const num::Matrix& mel, const data::RunConfig& cfg, std::uint64_t seed) {
  if (path.empty()) return;
  signal::MelSpectrogram m{mel, cfg.signal.hop_length, cfg.signal.n_fft};
  ensure_parent(path);
  data::write_wav(path, signal::griffin_lim(m, cfg.signal, cfg.inference.griffin_lim_iters, seed));
}

json synthesis_summary(const model::SynthesisResult& s) {
  return {{"frames", s.mel.rows()}, {"durations", s.durations}, {"pitch_hz", s.pitch_hz}};
}

// Resuming must not change anything but the step budget.
void check_resume_compatible(const std::string& recorded, const data::RunConfig& current) {
  auto strip = [](json j) {
    j["train"].erase("max_steps");
    j["train"].erase("checkpoint_every");
    return j;
  };
  json old;
  try {
    old = json::parse(recorded);
  } catch (const json::exception&) {
    throw DataError("checkpoint run configuration is unreadable");
  }
  if (strip(old) != strip(current.to_json())) {
    throw ConfigError("checkpoint was written under a different configuration; refusing to resume");
  }
}

}  // namespace

std::vector<int> text_to_ids(const std::string& text) {
  std::vector<int> ids;
  for (char c : text) {
    if (c == ' ' || c == '-') continue;
    if (c < 'a' || c > 'z') throw DataError(std::string("--text accepts lowercase letters only, got '") + c + "'");
    ids.push_back(c - 'a');
  }
  if (ids.empty()) throw DataError("--text is empty");
  return ids;
}

int run_prepare(const PrepareArgs& a) {
  auto cfg = data::RunConfig::load(a.config);
  cfg.validate();
  const fs::path out(a.out);
  std::string manifest = a.manifest;
  if (manifest.empty()) {
    if (!cfg.corpus) throw ConfigError("no --manifest given and the config has no corpus section");
    manifest = data::write_toy_corpus(*cfg.corpus, (out / "corpus").string());
    std::cerr << "generated " << cfg.corpus->utterances << " toy utterances in " << (out / "corpus").string() << "\n";
  }
  const auto report = data::prepare(manifest, cfg.signal, (out / "cache").string(), a.threads);
  for (const auto& [id, reason] : report.rejected) std::cerr << "rejected " << id << ": " << reason << "\n";
  std::cout << "prepared " << report.accepted.size() << " utterances (" << report.rejected.size() << " rejected) into "
            << (out / "cache").string() << "\n";

  json rejected = json::array();
  for (const auto& [id, reason] : report.rejected) rejected.push_back({{"id", id}, {"reason", reason}});
  write_run_metadata(out / "run.json", "prepare",
                     {{"config", a.config},
                      {"config_file_sha256", data::sha256_file(a.config)},
                      {"config_sha256", data::sha256_hex(cfg.canonical())},
                      {"manifest", manifest},
                      {"manifest_sha256", data::sha256_file(manifest)},
                      {"seed", cfg.corpus ? json(cfg.corpus->seed) : json(nullptr)},
                      {"accepted", report.accepted.size()},
                      {"rejected", rejected}});
  return 0;
}

int run_train(const TrainArgs& a) {
  auto cfg = data::RunConfig::load(a.config);
  if (a.steps) cfg.train.max_steps = *a.steps;
  cfg.validate();
  const auto set = data::load_training_set(a.data, cfg);
  for (const auto& id : set.skipped) std::cerr << "skipping " << id << ": no voiced frames\n";

  model::AcousticModel m(cfg.model, cfg.train.seed);
  m.set_stats(set.stats);
  training::Trainer trainer(m, cfg.train, set.examples);
  if (!a.resume.empty()) {
    const auto ck = training::load_checkpoint(a.resume);
    check_resume_compatible(ck.config_json, cfg);
    trainer.resume(ck);
    std::cerr << "resumed from step " << ck.step << "\n";
  }

  const fs::path out(a.out);
  fs::create_directories(out);
  const auto ckpt = (out / "checkpoint.vfck").string();
  std::ofstream metrics(out / "metrics.jsonl", a.resume.empty() ? std::ios::trunc : std::ios::app);
  if (!metrics) throw DataError("cannot write " + (out / "metrics.jsonl").string());

  const std::int64_t report_every = std::max<std::int64_t>(1, cfg.train.max_steps / 20);
  training::StepRecord last;
  trainer.run(&metrics, ckpt, cfg.canonical(), [&](const training::StepRecord& r) {
    last = r;
    if (!a.quiet && (r.step % report_every == 0 || r.step == 1)) {
      std::cerr << "step " << r.step << "  total " << r.loss.total << "  mel " << r.loss.melspec << "  pitch "
                << r.loss.pitch << "  energy " << r.loss.energy << "\n";
    }
  });
  if (!fs::exists(ckpt)) training::save_checkpoint(ckpt, trainer.checkpoint(cfg.canonical()));

  write_run_metadata(out / "run.json", "train",
                     {{"config", a.config},
                      {"config_file_sha256", data::sha256_file(a.config)},
                      {"config_sha256", data::sha256_hex(cfg.canonical())},
                      {"seed", cfg.train.seed},
                      {"data", a.data},
                      {"resumed_from", a.resume},
                      {"steps", trainer.steps_done()},
                      {"checkpoint", ckpt},
                      {"checkpoint_sha256", data::sha256_file(ckpt)},
                      {"final", last.step > 0 ? last.to_json() : json(nullptr)}});
  std::cout << "trained to step " << trainer.steps_done() << "; checkpoint " << ckpt << "\n";
  return 0;
}

int run_synth(const SynthArgs& a) {
  const auto tm = data::load_trained_model(a.checkpoint);
  const auto ids = resolve_ids(a.text, a.phoneme_ids, tm.config.model);
  model::SynthesisOptions opt;
  opt.sigma = a.sigma.value_or(tm.config.inference.sigma);
  opt.seed = a.seed;
  opt.dropout_at_inference = a.dropout_at_inference;
  const auto s = tm.model.synthesize(ids, opt);
  ensure_parent(a.out);
  write_npy(a.out, s.mel);
  maybe_write_wav(a.wav, s.mel, tm.config, a.seed);

  auto meta = checkpoint_provenance(a.checkpoint, tm);
  meta.update({{"phoneme_ids", ids}, {"sigma", opt.sigma}, {"seed", a.seed},
               {"dropout_at_inference", a.dropout_at_inference}, {"mel", a.out}, {"wav", a.wav}});
  meta["synthesis"] = synthesis_summary(s);
  write_run_metadata(a.out + ".json", "synth", meta);
  std::cout << "wrote " << s.mel.rows() << " frames to " << a.out << "\n";
  return 0;
}

int run_control(const SynthArgs& a) {
  const auto tm = data::load_trained_model(a.checkpoint);
  const auto trained_mode = std::string(model::to_string(tm.config.model.mode));
  if (!a.mode.empty() && a.mode != trained_mode) {
    throw ConfigError("checkpoint was trained in '" + trained_mode + "' mode, not '" + a.mode + "'");
  }
  if (a.dropout_at_inference) throw ConfigError("control does not support --dropout-at-inference");
  const auto ids = resolve_ids(a.text, a.phoneme_ids, tm.config.model);
  const double sigma = a.sigma.value_or(tm.config.inference.sigma);
  const auto r = eval::controlled_synthesize(tm.model, ids, a.lambda, sigma, a.seed, {a.energy_scale, false});
  ensure_parent(a.out);
  write_npy(a.out, r.synthesis.mel);
  maybe_write_wav(a.wav, r.synthesis.mel, tm.config, a.seed);

  auto meta = checkpoint_provenance(a.checkpoint, tm);
  meta.update({{"phoneme_ids", ids}, {"sigma", sigma}, {"seed", a.seed}, {"lambda", a.lambda},
               {"energy_scale", a.energy_scale}, {"mode", r.mode}, {"latent_change", r.latent_change},
               {"mel", a.out}, {"wav", a.wav}});
  meta["synthesis"] = synthesis_summary(r.synthesis);
  write_run_metadata(a.out + ".json", "control", meta);
  std::cout << "wrote " << r.synthesis.mel.rows() << " frames (" << r.mode << " mode, lambda " << a.lambda << ") to "
            << a.out << "\n";
  return 0;
}

int run_eval_ffe(const EvalFfeArgs& a) {
  const auto tm = data::load_trained_model(a.checkpoint);
  std::vector<std::vector<int>> texts;
  for (const auto& f : data::load_cache_dir(a.data)) {
    if (texts.size() == a.utterances) break;
    texts.push_back(f.phonemes);
  }
  if (texts.empty()) throw DataError("no utterances in " + a.data);
  const auto lambdas = a.lambdas.empty() ? eval::kDefaultShiftGrid : a.lambdas;
  const double sigma = a.sigma.value_or(tm.config.inference.sigma);
  const auto report = eval::evaluate_responsiveness(tm.model, texts, lambdas, sigma, a.seed, tm.config.signal, {});
  std::cout << report.table();
  auto meta = checkpoint_provenance(a.checkpoint, tm);
  meta.update({{"data", a.data}, {"utterances", texts.size()}, {"sigma", sigma}, {"seed", a.seed},
               {"report", report.to_json()}});
  write_run_metadata(a.out, "eval-ffe", meta);
  return 0;
}

int run_diversity(const DiversityArgs& a) {
  const auto tm = data::load_trained_model(a.checkpoint);
  const auto ids = resolve_ids(a.text, a.phoneme_ids, tm.config.model);
  if (a.n < 2) throw ConfigError("--n must be at least 2");
  const auto report = eval::diversity_sample(tm.model, ids, a.sigmas, a.n, a.dropout_at_inference, a.seed,
                                             tm.config.signal, {});
  for (const auto& s : report.sets) {
    std::cout << "sigma " << s.sigma << ": f0 dispersion " << s.dispersion << " Hz, duration variance "
              << s.duration_variance << "\n";
  }
  write_text(a.out, report.contour_dump());
  auto meta = checkpoint_provenance(a.checkpoint, tm);
  meta.update({{"phoneme_ids", ids}, {"n", a.n}, {"seed", a.seed}, {"dropout_at_inference", a.dropout_at_inference},
               {"contours", a.out}, {"sets", report.to_json()}});
  write_run_metadata(a.out + ".json", "diversity", meta);
  return 0;
}

int run_latents(const LatentArgs& a) {
  const auto tm = data::load_trained_model(a.checkpoint);
  if (!tm.model.has_flows()) throw ConfigError("latent diagnostic needs a flow or reversed mode checkpoint");
  auto set = data::load_training_set(a.data, tm.config);
  const auto report = eval::latent_gaussianity_check(tm.model, set.examples);
  std::cout << report.to_json().dump(2) << "\n";
  auto meta = checkpoint_provenance(a.checkpoint, tm);
  meta.update({{"data", a.data}, {"report", report.to_json()}});
  write_run_metadata(a.out, "latents", meta);
  return 0;
}

int run_plot(const PlotArgs& a) {
  const auto sets = read_contour_dump(a.contours);
  write_text(a.out, render_contours_svg(sets, a.title));
  write_run_metadata(a.out + ".json", "plot",
                     {{"contours", a.contours}, {"contours_sha256", data::sha256_file(a.contours)}, {"title", a.title}});
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

}  // namespace varflow::cli
