// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--checkpoint trained.vfck --data cache_dir] [--workdir dir]
// Without a checkpoint the toy preset is generated, prepared and trained
// in-process first.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "varflow/data/prepare.hpp"
#include "varflow/data/run_config.hpp"
#include "varflow/data/session.hpp"
#include "varflow/data/toy_corpus.hpp"
#include "varflow/eval/control.hpp"
#include "varflow/eval/reports.hpp"
#include "varflow/flows/flow.hpp"
#include "varflow/flows/spline.hpp"
#include "varflow/model/length_regulator.hpp"
#include "varflow/numerics/ops.hpp"
#include "varflow/training/checkpoint.hpp"
#include "varflow/training/loss.hpp"
#include "varflow/training/optimizer.hpp"
#include "varflow/training/trainer.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace varflow;
using num::Tensor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

Tensor random_matrix(std::size_t rows, std::size_t cols, num::Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(rows * cols);
  for (double& e : v) e = n(rng);
  return Tensor::from(rows, cols, v);
}

// ---------------------------------------------------------------------------
// 1. Spline and stack round trips.
Outcome spline_bijectivity() {
  const auto t0 = std::chrono::steady_clock::now();
  flows::SplineConfig cfg;
  num::Rng rng(101);
  std::normal_distribution<double> raw_dist(0.0, 2.0);
  std::uniform_real_distribution<double> x_dist(-cfg.bound - 2.0, cfg.bound + 2.0);
  std::vector<double> raw(cfg.raw_size());
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    for (double& r : raw) r = raw_dist(rng);
    const flows::SplineParams p{raw, &cfg};
    const double x = x_dist(rng);
    const double y = flows::rq_spline_forward(x, p).value;
    worst = std::max(worst, std::abs(flows::rq_spline_inverse(y, p).value - x));
  }

  flows::FlowConfig fc;
  fc.condition_channels = 8;
  num::ParameterSet params;
  flows::FlowStack flow(params, "f", fc, rng);
  testing::randomize(params, rng, 0.5);
  double stack_worst = 0.0;
  num::NoGradGuard guard;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t T = 1 + static_cast<std::size_t>(trial % 23);
    const Tensor x = random_matrix(T, 1, rng, 2.0);
    const Tensor h = random_matrix(T, 8, rng);
    const std::vector<std::uint8_t> mask(T, 1);
    const auto z = flow.forward(x, h, mask).z;
    const auto back = flow.inverse(z.values(), h, mask);
    for (std::size_t t = 0; t < T; ++t) stack_worst = std::max(stack_worst, std::abs(back[t] - x(t, 0)));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-8 && stack_worst < 1e-6 && secs < 10.0,
          fmt("scalar max err %.2e (<1e-8) over 1e4 draws, stack max err %.2e (<1e-6), %.2fs (<10s)", worst,
              stack_worst, secs)};
}

// ---------------------------------------------------------------------------
// 2. Flow NLL against change of variables with a finite-difference Jacobian.
Outcome exact_likelihood() {
  const auto t0 = std::chrono::steady_clock::now();
  flows::FlowConfig fc;
  fc.condition_channels = 4;
  fc.hidden = 8;
  num::Rng rng(202);
  num::ParameterSet params;
  flows::FlowStack flow(params, "f", fc, rng);
  testing::randomize(params, rng, 0.5);
  num::NoGradGuard guard;
  const std::size_t T = 4;
  const std::vector<std::uint8_t> mask(T, 1);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor x = random_matrix(T, 1, rng, 1.5);
    const Tensor h = random_matrix(T, 4, rng);
    const double nll = flow.nll_sum(flow.forward(x, h, mask), mask).item();

    const auto z = flow.forward(x, h, mask).z;
    Eigen::Matrix4d J;
    const double eps = 1e-6;
    for (std::size_t j = 0; j < T; ++j) {
      std::vector<double> up(x.values().begin(), x.values().end()), down = up;
      up[j] += eps;
      down[j] -= eps;
      const auto zu = flow.forward(Tensor::column(up), h, mask).z;
      const auto zd = flow.forward(Tensor::column(down), h, mask).z;
      for (std::size_t i = 0; i < T; ++i) J(static_cast<int>(i), static_cast<int>(j)) = (zu(i, 0) - zd(i, 0)) / (2 * eps);
    }
    double oracle = -std::log(std::abs(J.determinant()));
    for (std::size_t t = 0; t < T; ++t) oracle += kHalfLog2Pi + 0.5 * z(t, 0) * z(t, 0);
    worst = std::max(worst, std::abs(nll - oracle) / std::max(1.0, std::abs(oracle)));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-3 && secs < 30.0,
          fmt("200 sequences of T=4, max relative error %.2e (<1e-3), %.2fs (<30s)", worst, secs)};
}

// ---------------------------------------------------------------------------
// 3. A one-layer flow's density integrates to one.
Outcome normalization() {
  flows::FlowConfig fc;
  fc.layers = 1;
  fc.condition_channels = 3;
  fc.hidden = 8;
  num::Rng rng(303);
  num::ParameterSet params;
  flows::FlowStack flow(params, "f", fc, rng);
  testing::randomize(params, rng, 0.8);
  const Tensor h = random_matrix(1, 3, rng);
  const std::vector<std::uint8_t> mask{1};
  const double lo = -fc.spline.bound - 3.0, hi = fc.spline.bound + 3.0;
  const int n = 40000;
  const double dx = (hi - lo) / n;
  double integral = 0.0, departure = 0.0;
  num::NoGradGuard guard;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * dx;
    const double log_density = -flow.nll(Tensor::scalar(x), h, mask).item();
    departure = std::max(departure, std::abs(log_density - (-kHalfLog2Pi - 0.5 * x * x)));
    integral += (i == 0 || i == n ? 0.5 : 1.0) * std::exp(log_density) * dx;
  }
  // A density equal to the prior would make the check vacuous.
  return {std::abs(integral - 1.0) < 1e-3 && departure > 0.05,
          fmt("integral over [%.0f, %.0f] = %.6f (1 +- 1e-3); max |log p - log N| = %.3f (non-trivial)", lo, hi,
              integral, departure)};
}

// ---------------------------------------------------------------------------
// 4. Fresh model: flow NLL equals the standard-normal NLL; loss composes.
Outcome identity_initialization(const data::RunConfig& cfg, const data::TrainingSet& set) {
  model::AcousticModel m(cfg.model, 4242);
  m.set_stats(set.stats);
  double worst = 0.0;
  std::vector<model::LossTerms> terms;
  const std::size_t n = std::min<std::size_t>(set.examples.size(), 16);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ex = set.examples[i];
    terms.push_back(m.loss_terms(ex, model::ForwardContext::inference()));
    const auto& t = terms.back();
    for (const auto* track : {&ex.pitch, &ex.energy}) {
      double expected = 0.0;
      for (double v : *track) expected += kHalfLog2Pi + 0.5 * v * v;
      const double got = (track == &ex.pitch ? t.pitch : t.energy).item();
      worst = std::max(worst, std::abs(got - expected) / static_cast<double>(track->size()));
    }
  }
  const auto b = training::total_loss(terms, cfg.train.alpha);
  const bool composes = b.total == b.melspec + b.duration + b.alpha * b.pitch + b.alpha * b.energy;
  return {worst < 1e-10 && composes && cfg.train.alpha == 0.1,
          fmt("max per-frame NLL deviation %.2e (<1e-10) on %zu toy utterances; total = mel + dur + %.1f*(pitch + "
              "energy) %s",
              worst, n, b.alpha, composes ? "exactly" : "NOT exactly")};
}

// ---------------------------------------------------------------------------
// 5. Full objective gradient against central differences, every group.
Outcome gradient_integrity() {
  const auto cfg = testing::micro_config();
  model::AcousticModel m(cfg, 55);
  num::Rng rng(55);
  testing::randomize(m.parameters(), rng, 0.3);
  const auto ex = testing::random_example(cfg, {2, 4}, rng);
  auto objective = [&] {
    const model::LossTerms terms[] = {m.loss_terms(ex, {})};
    return training::total_loss(terms, 0.1);
  };
  m.parameters().zero_grad();
  num::backward(objective().objective);

  double worst = 0.0;
  std::string worst_name;
  num::NoGradGuard guard;
  for (auto& entry : m.parameters()) {
    const auto analytic = entry.tensor.grad();
    auto values = entry.tensor.mutable_values();
    double diff2 = 0.0, num2 = 0.0, ana2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i], h = 1e-6;
      values[i] = saved + h;
      const double up = objective().total;
      values[i] = saved - h;
      const double down = objective().total;
      values[i] = saved;
      const double fd = (up - down) / (2 * h);
      diff2 += (fd - analytic[i]) * (fd - analytic[i]);
      num2 += fd * fd;
      ana2 += analytic[i] * analytic[i];
    }
    // Attention key biases cancel in the softmax, so their gradient is exactly
    // zero and only difference noise (~1e-9) is left; the floor keeps that
    // from reading as a relative error.
    const double rel = std::sqrt(diff2) / std::max(std::sqrt(std::max(num2, ana2)), 1e-5);
    if (rel > worst) worst = rel, worst_name = entry.name;
  }
  return {worst < 1e-3, fmt("%zu parameter groups, worst relative error %.2e in %s (<1e-3)", m.parameters().size(),
                            worst, worst_name.c_str())};
}

// ---------------------------------------------------------------------------
// 6. Bimodal density: flow versus the best single Gaussian.
Outcome expressiveness() {
  const auto t0 = std::chrono::steady_clock::now();
  const double mu = 2.0, s = 0.5;
  auto mixture_pdf = [&](double x) {
    auto g = [&](double m) { return std::exp(-0.5 * (x - m) * (x - m) / (s * s)) / (s * std::sqrt(2 * std::numbers::pi)); };
    return 0.5 * g(-mu) + 0.5 * g(mu);
  };
  // Differential entropy by Simpson's rule.
  const int n = 20000;
  const double lo = -12.0, hi = 12.0, dx = (hi - lo) / n;
  double entropy = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double p = mixture_pdf(lo + i * dx);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    if (p > 0) entropy -= w * p * std::log(p);
  }
  entropy *= dx / 3.0;
  const double mixture_var = s * s + mu * mu;
  const double kl_gap = 0.5 * std::log(2 * std::numbers::pi * std::numbers::e * mixture_var) - entropy;

  num::Rng rng(606);
  auto draw = [&](std::size_t count) {
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> g(0.0, s);
    std::vector<double> v(count);
    for (double& x : v) x = (coin(rng) ? mu : -mu) + g(rng);
    return v;
  };
  flows::FlowConfig fc;
  fc.condition_channels = 1;
  fc.hidden = 16;
  num::ParameterSet params;
  flows::FlowStack flow(params, "f", fc, rng);
  training::AdamW opt(params, {0.9, 0.98, 1e-9, 0.0});
  const std::size_t batch = 512;
  const std::vector<std::uint8_t> mask(batch, 1);
  const Tensor h = Tensor::zeros(batch, 1);  // conditioning held fixed
  std::vector<double> train_pool;
  for (int step = 1; step <= 400; ++step) {
    const auto x = draw(batch);
    train_pool.insert(train_pool.end(), x.begin(), x.end());
    const auto loss = flow.nll(Tensor::column(x), h, mask);
    params.zero_grad();
    num::backward(loss);
    training::clip_grad_norm(params, 5.0);
    opt.step(params, 1e-2 * std::min(1.0, step / 50.0));
  }

  const auto test = draw(20000);
  const std::vector<std::uint8_t> test_mask(test.size(), 1);
  double flow_nll = 0.0;
  {
    num::NoGradGuard guard;
    flow_nll = flow.nll(Tensor::column(test), Tensor::zeros(test.size(), 1), test_mask).item();
  }
  double mean = 0.0, var = 0.0;
  for (double v : train_pool) mean += v;
  mean /= static_cast<double>(train_pool.size());
  for (double v : train_pool) var += (v - mean) * (v - mean);
  var /= static_cast<double>(train_pool.size());
  double gauss_nll = 0.0;
  for (double v : test) gauss_nll += 0.5 * std::log(2 * std::numbers::pi * var) + 0.5 * (v - mean) * (v - mean) / var;
  gauss_nll /= static_cast<double>(test.size());

  const double secs = seconds_since(t0);
  const bool flow_ok = flow_nll - entropy < 0.1;
  const bool gauss_worse = gauss_nll - entropy >= 0.8 * kl_gap;
  return {flow_ok && gauss_worse && secs < 120.0,
          fmt("entropy %.4f; flow NLL %.4f (gap %.4f < 0.1); Gaussian NLL %.4f (gap %.4f >= 0.8 x KL %.4f); %.1fs",
              entropy, flow_nll, flow_nll - entropy, gauss_nll, gauss_nll - entropy, kl_gap, secs)};
}

// ---------------------------------------------------------------------------
// 7. lambda = 0 control reproduces plain synthesis.
Outcome control_identity(const model::AcousticModel& m, const std::vector<std::vector<int>>& texts, double sigma) {
  double worst_z = 0.0, worst_mel = 0.0;
  bool identical = true;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    model::SynthesisOptions opt;
    opt.sigma = sigma;
    opt.seed = 70 + i;
    const auto plain = m.synthesize(texts[i], opt);
    const auto kept = eval::controlled_synthesize(m, texts[i], 0.0, sigma, 70 + i);
    identical = identical && kept.synthesis.mel.data() == plain.mel.data();
    const auto redone = eval::controlled_synthesize(m, texts[i], 0.0, sigma, 70 + i, {1.0, true});
    worst_z = std::max(worst_z, redone.latent_change);
    for (std::size_t k = 0; k < plain.mel.data().size(); ++k)
      worst_mel = std::max(worst_mel, std::abs(plain.mel.data()[k] - redone.synthesis.mel.data()[k]));
  }
  return {worst_z < 1e-6 && identical,
          fmt("%zu texts: inverse-then-forward max |z' - z| = %.2e (<1e-6), mel delta %.2e; default path mel %s",
              texts.size(), worst_z, worst_mel, identical ? "bit-identical" : "DIFFERENT")};
}

// ---------------------------------------------------------------------------
// 8. Pitch shifts move the generated frequency.
Outcome responsiveness(const model::AcousticModel& m, const std::vector<std::vector<int>>& texts, double sigma,
                       const signal::SignalConfig& sc, double train_seconds) {
  const auto r = eval::evaluate_responsiveness(m, texts, {-2.0, 2.0}, sigma, 5, sc, {});
  const auto& down = r.at(-2.0);
  const auto& up = r.at(2.0);
  const auto& zero = r.at(0.0);
  auto within = [](const eval::ResponsivenessRow& row) {
    return std::abs(row.measured_ratio - row.expected_ratio) <= 0.2 * row.expected_ratio;
  };
  // "Within 20%" alone would also accept an unmoved pitch, so the direction is
  // checked too.
  const bool direction = down.measured_ratio < 1.0 && up.measured_ratio > 1.0;
  const bool pass = within(down) && within(up) && direction && zero.ffe.ffe_percent < 30.0 && train_seconds < 600.0;
  return {pass, fmt("ratio(-2) %.4f vs %.4f, ratio(+2) %.4f vs %.4f (within 20%%, direction %s); FFE(0) %.2f%% "
                    "(<30%%); FFE(-2) %.2f%%, FFE(+2) %.2f%%; toy training %.0fs (<600s)",
                    down.measured_ratio, down.expected_ratio, up.measured_ratio, up.expected_ratio,
                    direction ? "ok" : "WRONG", zero.ffe.ffe_percent, down.ffe.ffe_percent, up.ffe.ffe_percent,
                    train_seconds)};
}

// ---------------------------------------------------------------------------
// 9. Reversed mode feeds x; flow mode feeds z.
double decoder_delta_under_latent_change(const model::AcousticModel& m, const std::vector<int>& ids, num::Rng& rng) {
  num::NoGradGuard guard;
  const std::vector<std::uint8_t> pmask(ids.size(), 1);
  const auto ctx = model::ForwardContext::inference();
  const Tensor h = m.encode(ids, pmask, ctx);
  const std::vector<int> durations(ids.size(), 3);
  const Tensor hf = model::length_regulate(h, durations);
  const std::size_t T = hf.rows();
  const std::vector<std::uint8_t> fmask(T, 1);
  const Tensor x_p = random_matrix(T, 1, rng), x_e = random_matrix(T, 1, rng);
  auto run = [&](const Tensor& z_p, const Tensor& z_e) {
    return m.decode(m.decoder_input(hf, m.select_feed(x_p, z_p), m.select_feed(x_e, z_e), fmask), fmask, ctx);
  };
  const Tensor a = run(random_matrix(T, 1, rng), random_matrix(T, 1, rng));
  const Tensor b = run(random_matrix(T, 1, rng), random_matrix(T, 1, rng));
  double delta = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) delta = std::max(delta, std::abs(a.values()[i] - b.values()[i]));
  return delta;
}

Outcome ablation_wiring(const data::RunConfig& cfg, const model::AcousticModel& trained) {
  auto rcfg = cfg.model;
  rcfg.mode = model::VarianceMode::reversed;
  model::AcousticModel reversed(rcfg, 9);
  num::Rng rng(909);
  testing::randomize(reversed.parameters(), rng, 0.2);
  const std::vector<int> ids{1, 4, 2, 7, 3};
  const double d_rev = decoder_delta_under_latent_change(reversed, ids, rng);
  const double d_flow = decoder_delta_under_latent_change(trained, ids, rng);
  return {d_rev == 0.0 && d_flow > 0.0,
          fmt("max |decoder delta| when z changes with x fixed: reversed %.3g (must be 0), flow %.3g (must be > 0)",
              d_rev, d_flow)};
}

// ---------------------------------------------------------------------------
// 10. More latent spread gives more f0 spread.
Outcome diversity_direction(const model::AcousticModel& m, const std::vector<int>& text,
                            const signal::SignalConfig& sc) {
  const auto r = eval::diversity_sample(m, text, {0.0, 0.667}, 10, false, 11, sc, {});
  const double d0 = r.sets[0].dispersion, d1 = r.sets[1].dispersion;
  return {d0 == 0.0 && d1 > d0,
          fmt("10 samples each, dropout off: dispersion sigma=0 %.3g Hz (exactly 0), sigma=0.667 %.3f Hz", d0, d1)};
}

// ---------------------------------------------------------------------------
// 11. Latents are less tied to the conditioning than raw values are.
Outcome disentanglement(const model::AcousticModel& m, const std::vector<model::TrainingExample>& data) {
  const auto r = eval::latent_gaussianity_check(m, data);
  const bool pitch_ok = std::abs(r.pitch.corr_z_hidden) < std::abs(r.pitch.corr_x_hidden);
  const bool energy_ok = std::abs(r.energy.corr_z_hidden) < std::abs(r.energy.corr_x_hidden);
  return {pitch_ok && energy_ok,
          fmt("pitch |corr(z,h)| %.3f < |corr(x,h)| %.3f; energy %.3f < %.3f; z mean/var pitch %.3f/%.3f energy "
              "%.3f/%.3f over %zu frames",
              std::abs(r.pitch.corr_z_hidden), std::abs(r.pitch.corr_x_hidden), std::abs(r.energy.corr_z_hidden),
              std::abs(r.energy.corr_x_hidden), r.pitch.z_mean, r.pitch.z_variance, r.energy.z_mean,
              r.energy.z_variance, r.pitch.positions)};
}

// ---------------------------------------------------------------------------
// 12. Same seed, same log; checkpoint resume matches an uninterrupted run.
Outcome reproducibility(const data::RunConfig& cfg, const data::TrainingSet& set, const fs::path& dir) {
  auto tc = cfg.train;
  tc.max_steps = 12;
  tc.batch_size = 4;
  auto log_of = [&](training::Trainer& t) {
    std::ostringstream out;
    t.run(&out, "", "{}");
    return out.str();
  };
  auto fresh = [&] {
    model::AcousticModel m(cfg.model, cfg.train.seed);
    m.set_stats(set.stats);
    return m;
  };

  auto m1 = fresh(), m2 = fresh();
  training::Trainer t1(m1, tc, set.examples), t2(m2, tc, set.examples);
  const std::string log1 = log_of(t1), log2 = log_of(t2);

  auto m3 = fresh();
  auto half = tc;
  half.max_steps = 6;
  training::Trainer t3(m3, half, set.examples);
  std::ostringstream log3;
  t3.run(&log3, "", "{}");
  const auto path = (dir / "resume_check.vfck").string();
  training::save_checkpoint(path, t3.checkpoint(cfg.canonical()));

  auto m4 = fresh();
  training::Trainer t4(m4, tc, set.examples);
  t4.resume(training::load_checkpoint(path));
  log3 << log_of(t4);

  bool params_equal = true;
  for (std::size_t i = 0; i < m1.parameters().size(); ++i) {
    const auto a = m1.parameters().entries()[i].tensor.values();
    const auto b = m4.parameters().entries()[i].tensor.values();
    params_equal = params_equal && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
  }
  const bool same_logs = !log1.empty() && log1 == log2;
  const bool resumed = log3.str() == log1 && params_equal;
  return {same_logs && resumed, fmt("two 12-step runs %s; 6 steps + save/load + 6 steps: log %s, parameters %s",
                                    same_logs ? "byte-identical" : "DIFFER", log3.str() == log1 ? "identical" : "DIFFERS",
                                    params_equal ? "bit-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  std::string checkpoint, data_dir, workdir = (fs::temp_directory_path() / "varflow_acceptance").string();
  std::string config_path = VARFLOW_SOURCE_DIR "/configs/toy.json";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    if (key == "--checkpoint") checkpoint = argv[i + 1];
    else if (key == "--data") data_dir = argv[i + 1];
    else if (key == "--workdir") workdir = argv[i + 1];
    else if (key == "--config") config_path = argv[i + 1];
    else {
      std::cerr << "unknown argument " << key << "\n";
      return 1;
    }
  }
  if (checkpoint.empty() != data_dir.empty()) {
    std::cerr << "--checkpoint and --data go together\n";
    return 1;
  }

  std::vector<std::pair<std::string, std::function<Outcome()>>> plan;
  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << o.detail << std::endl;
  };

  // Criteria that need no trained model.
  report(1, "spline bijectivity", spline_bijectivity);
  report(2, "exact likelihood", exact_likelihood);
  report(3, "density normalization", normalization);
  report(5, "gradient integrity", gradient_integrity);
  report(6, "expressiveness", expressiveness);

  // Toy preset: data, training, then the model-level criteria.
  fs::create_directories(workdir);
  data::RunConfig cfg = data::RunConfig::load(config_path);
  cfg.validate();
  double train_seconds = 0.0;
  std::optional<data::TrainedModel> trained;
  try {
    if (checkpoint.empty()) {
      const auto t0 = std::chrono::steady_clock::now();
      data_dir = (fs::path(workdir) / "cache").string();
      const auto manifest = data::write_toy_corpus(*cfg.corpus, (fs::path(workdir) / "corpus").string());
      data::prepare(manifest, cfg.signal, data_dir);
      const auto set = data::load_training_set(data_dir, cfg);
      model::AcousticModel m(cfg.model, cfg.train.seed);
      m.set_stats(set.stats);
      training::Trainer trainer(m, cfg.train, set.examples);
      double first_mel = 0.0, last_mel = 0.0;
      trainer.run(nullptr, "", "{}", [&](const training::StepRecord& r) {
        if (r.step == 10) first_mel = r.loss.melspec;
        last_mel = r.loss.melspec;
      });
      train_seconds = seconds_since(t0);
      checkpoint = (fs::path(workdir) / "toy.vfck").string();
      training::save_checkpoint(checkpoint, trainer.checkpoint(cfg.canonical()));
      std::cout << "INFO  toy preset: " << cfg.train.max_steps << " steps in " << fmt("%.0f", train_seconds)
                << "s; melspec loss step 10 " << fmt("%.4f", first_mel) << " -> final " << fmt("%.4f", last_mel)
                << " (" << fmt("%.1f", first_mel / last_mel) << "x decrease)" << std::endl;
    }
    trained.emplace(data::load_trained_model(checkpoint));
  } catch (const std::exception& e) {
    std::cout << "FAIL  toy preset training: " << e.what() << std::endl;
    return 1;
  }
  const auto set = data::load_training_set(data_dir, trained->config);
  const auto& m = trained->model;
  const auto& sc = trained->config.signal;
  const double sigma = trained->config.inference.sigma;

  std::vector<std::vector<int>> texts;
  for (const auto& f : data::load_cache_dir(data_dir)) {
    if (texts.size() == 16) break;
    texts.push_back(f.phonemes);
  }

  {
    // Duration predictor sanity on the training texts.
    double err = 0.0;
    std::size_t count = 0;
    for (const auto& ex : set.examples) {
      num::NoGradGuard guard;
      const auto ctx = model::ForwardContext::inference();
      const auto h = m.encode(ex.phonemes, ex.phoneme_mask, ctx);
      const auto logd = m.predict_log_durations(h, ex.phoneme_mask, ctx);
      for (std::size_t i = 0; i < ex.durations.size(); ++i) {
        err += std::abs(model::duration_from_log(logd(i, 0)) - ex.durations[i]);
        ++count;
      }
    }
    std::cout << "INFO  duration predictor: mean absolute error " << fmt("%.3f", err / static_cast<double>(count))
              << " frames per phoneme" << std::endl;
  }

  report(4, "identity initialization", [&] { return identity_initialization(trained->config, set); });
  report(7, "control identity", [&] { return control_identity(m, texts, sigma); });
  report(8, "toy responsiveness", [&] { return responsiveness(m, texts, sigma, sc, train_seconds); });
  report(9, "ablation wiring", [&] { return ablation_wiring(trained->config, m); });
  report(10, "diversity direction", [&] { return diversity_direction(m, texts.front(), sc); });
  report(11, "disentanglement diagnostic", [&] { return disentanglement(m, set.examples); });
  report(12, "reproducibility", [&] { return reproducibility(trained->config, set, workdir); });

  std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : std::to_string(failures) + " CRITERIA FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
