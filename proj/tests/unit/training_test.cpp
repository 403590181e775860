#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "test_util.hpp"
#include "varflow/errors.hpp"
#include "varflow/training/checkpoint.hpp"
#include "varflow/training/loss.hpp"
#include "varflow/training/optimizer.hpp"
#include "varflow/training/trainer.hpp"

using namespace varflow;
using namespace varflow::training;
using varflow::testing::micro_config;
using varflow::testing::random_example;
using varflow::testing::randomize;
using varflow::testing::unit_stats;

namespace {

model::LossTerms scalar_terms(double mel, double dur, double pitch, double energy, std::size_t n = 1) {
  model::LossTerms t;
  t.melspec = num::Tensor::scalar(mel * n);
  t.duration = num::Tensor::scalar(dur * n);
  t.pitch = num::Tensor::scalar(pitch * n);
  t.energy = num::Tensor::scalar(energy * n);
  t.melspec_count = t.duration_count = t.pitch_count = t.energy_count = n;
  return t;
}

std::vector<model::TrainingExample> micro_dataset(std::size_t n, std::uint64_t seed) {
  num::Rng rng(seed);
  std::uniform_int_distribution<int> len(2, 5), dur(1, 3);
  std::vector<model::TrainingExample> out;
  const auto cfg = micro_config();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> d(static_cast<std::size_t>(len(rng)));
    for (int& v : d) v = dur(rng);
    out.push_back(random_example(cfg, d, rng));
  }
  return out;
}

TrainConfig micro_train() {
  TrainConfig c;
  c.batch_size = 3;
  c.max_steps = 100;
  c.warmup_steps = 10;
  c.lr_scale = 0.05;
  c.seed = 9;
  return c;
}

model::AcousticModel micro_model() {
  model::AcousticModel m(micro_config(), 3);
  m.set_stats(unit_stats(micro_config().n_mels));
  return m;
}

bool same_bits(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(TotalLoss, ComposesExactly) {
  const model::LossTerms t[] = {scalar_terms(0.37, 1.3, -0.8, 2.2, 3), scalar_terms(0.11, 0.4, 1.7, -0.3, 5)};
  const auto b = total_loss(t, 0.1);
  EXPECT_EQ(b.total, b.melspec + b.duration + 0.1 * b.pitch + 0.1 * b.energy);
  EXPECT_NEAR(b.melspec, (0.37 * 3 + 0.11 * 5) / 8, 1e-15);
}

TEST(TotalLoss, AlphaZeroDropsVarianceTerms) {
  const model::LossTerms t[] = {scalar_terms(0.5, 0.25, 7.0, 9.0)};
  const auto b = total_loss(t, 0.0);
  EXPECT_EQ(b.total, 0.75);
}

TEST(TotalLoss, AllPaddingIsZero) {
  model::LossTerms empty;
  empty.melspec = num::Tensor::scalar(0.0);
  const model::LossTerms t[] = {empty};
  const auto b = total_loss(t, 0.1);
  EXPECT_EQ(b.melspec, 0.0);
  EXPECT_EQ(b.duration, 0.0);
  EXPECT_EQ(b.pitch, 0.0);
  EXPECT_EQ(b.energy, 0.0);
  EXPECT_EQ(b.total, 0.0);
}

TEST(TotalLoss, NaNNamesComponent) {
  const model::LossTerms t[] = {scalar_terms(0.1, 0.1, std::nan(""), 0.1)};
  try {
    total_loss(t, 0.1);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("pitch"), std::string::npos);
  }
}

TEST(TotalLoss, FreshFlowGivesStandardNormalNll) {
  num::Rng rng(4);
  const auto cfg = micro_config();
  model::AcousticModel m(cfg, 12);
  const auto ex = random_example(cfg, {3, 2, 4, 1}, rng);
  const auto terms = m.loss_terms(ex, model::ForwardContext::inference());
  for (const auto* track : {&ex.pitch, &ex.energy}) {
    double sq = 0.0;
    for (double v : *track) sq += v * v;
    const double expected =
        0.5 * std::log(2.0 * std::numbers::pi) + 0.5 * sq / static_cast<double>(track->size());
    const auto& sum = track == &ex.pitch ? terms.pitch : terms.energy;
    const auto n = track == &ex.pitch ? terms.pitch_count : terms.energy_count;
    EXPECT_NEAR(sum.item() / static_cast<double>(n), expected, 1e-10);
  }
}

TEST(TotalLoss, BatchPaddingInvariance) {
  num::Rng rng(5);
  const auto cfg = micro_config();
  model::AcousticModel m(cfg, 13);
  randomize(m.parameters(), rng, 0.3);
  const auto a = random_example(cfg, {2, 3}, rng);
  const auto b = random_example(cfg, {1, 4, 2}, rng);
  const auto ctx = model::ForwardContext::inference();
  const model::LossTerms plain[] = {m.loss_terms(a, ctx), m.loss_terms(b, ctx)};
  const model::LossTerms padded[] = {m.loss_terms(a.padded(2, 5), ctx), m.loss_terms(b.padded(0, 3), ctx)};
  const auto x = total_loss(plain, 0.1), y = total_loss(padded, 0.1);
  EXPECT_NEAR(x.melspec, y.melspec, 1e-12);
  EXPECT_NEAR(x.duration, y.duration, 1e-12);
  EXPECT_NEAR(x.pitch, y.pitch, 1e-12);
  EXPECT_NEAR(x.energy, y.energy, 1e-12);
}

TEST(Noam, Branches) {
  const double peak = noam_lr(400, 256, 400, 1.0);
  EXPECT_NEAR(peak, 1.0 / std::sqrt(256.0) / std::sqrt(400.0), 1e-15);
  for (int s = 1; s < 400; ++s) EXPECT_LT(noam_lr(s, 256, 400, 1.0), noam_lr(s + 1, 256, 400, 1.0));
  EXPECT_NEAR(noam_lr(1600, 256, 400, 1.0), peak / 2, 1e-15);
  EXPECT_NEAR(noam_lr(400, 32, 400, 0.113), 0.113 / std::sqrt(32.0 * 400.0), 1e-15);
  EXPECT_THROW(noam_lr(0, 256, 400, 1.0), std::invalid_argument);
}

TEST(AdamW, ZeroGradientNoDecayLeavesParams) {
  num::ParameterSet p;
  p.create("w", 1, 3, {1.0, -2.0, 0.5});
  AdamW opt(p, {0.9, 0.98, 1e-9, 0.0});
  p.find("w")->mutable_grad();
  opt.step(p, 0.1);
  const auto v = p.find("w")->values();
  EXPECT_EQ(v[0], 1.0);
  EXPECT_EQ(v[1], -2.0);
  EXPECT_EQ(v[2], 0.5);
}

TEST(AdamW, SingleStepOnLinearFunction) {
  num::ParameterSet p;
  p.create("w", 1, 1, {2.0});
  AdamW opt(p, {0.9, 0.98, 1e-9, 0.0});
  p.find("w")->mutable_grad()[0] = 1.0;  // d/dw of f(w) = w
  const double eps = 1e-3;
  opt.step(p, eps);
  // Bias correction makes both moment estimates exactly 1 after one step.
  EXPECT_NEAR(p.find("w")->values()[0], 2.0 - eps / (1.0 + 1e-9), 1e-15);
}

TEST(AdamW, DecoupledDecayShrinksMultiplicatively) {
  num::ParameterSet p;
  p.create("w", 1, 2, {3.0, -1.5});
  AdamW opt(p, {0.9, 0.98, 1e-9, 0.01});
  p.find("w")->mutable_grad();
  opt.step(p, 0.5);
  EXPECT_NEAR(p.find("w")->values()[0], 3.0 * (1 - 0.5 * 0.01), 1e-15);
  EXPECT_NEAR(p.find("w")->values()[1], -1.5 * (1 - 0.5 * 0.01), 1e-15);
}

TEST(ClipGradNorm, NeverIncreases) {
  num::Rng rng(2);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (double limit : {0.1, 1.0, 100.0}) {
    num::ParameterSet p;
    p.create("a", 2, 3, std::vector<double>(6, 0.0));
    p.create("b", 1, 4, std::vector<double>(4, 0.0));
    for (auto& e : p)
      for (double& g : e.tensor.mutable_grad()) g = normal(rng);
    const double before = p.grad_norm();
    EXPECT_DOUBLE_EQ(clip_grad_norm(p, limit), before);
    EXPECT_LE(p.grad_norm(), before);
    EXPECT_LE(p.grad_norm(), limit * (1 + 1e-12));
  }
}

TEST(Trainer, SameSeedSameCurve) {
  const auto data = micro_dataset(8, 1);
  auto run = [&] {
    auto m = micro_model();
    Trainer t(m, micro_train(), data);
    std::ostringstream log;
    t.run(&log, "", "{}");
    return log.str();
  };
  const std::string a = run(), b = run();
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);
}

TEST(Trainer, LoggedTotalsCompose) {
  auto m = micro_model();
  Trainer t(m, micro_train(), micro_dataset(6, 2));
  for (int i = 0; i < 10; ++i) {
    const auto r = t.step();
    const auto& l = r.loss;
    EXPECT_EQ(l.total, l.melspec + l.duration + l.alpha * l.pitch + l.alpha * l.energy);
    const auto j = r.to_json();
    for (const char* key : {"step", "lr", "melspec", "duration", "pitch", "energy", "total", "alpha"})
      EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(Trainer, ResumeIsBitExact) {
  const auto data = micro_dataset(8, 3);
  auto straight = micro_model();
  Trainer a(straight, micro_train(), data);
  std::vector<double> totals;
  for (int i = 0; i < 8; ++i) totals.push_back(a.step().loss.total);

  auto first = micro_model();
  Trainer b(first, micro_train(), data);
  for (int i = 0; i < 5; ++i) b.step();
  const auto bytes = encode_checkpoint(b.checkpoint("{\"x\":1}"));

  auto second = micro_model();
  Trainer c(second, micro_train(), data);
  c.resume(decode_checkpoint(bytes));
  EXPECT_EQ(c.steps_done(), 5);
  for (int i = 5; i < 8; ++i) EXPECT_EQ(c.step().loss.total, totals[static_cast<std::size_t>(i)]);
  const auto& pa = straight.parameters().entries();
  const auto& pc = second.parameters().entries();
  ASSERT_EQ(pa.size(), pc.size());
  for (std::size_t i = 0; i < pa.size(); ++i)
    EXPECT_TRUE(same_bits(pa[i].tensor.values(), pc[i].tensor.values())) << pa[i].name;
}

TEST(Checkpoint, RoundTripPreservesEverything) {
  auto m = micro_model();
  Trainer t(m, micro_train(), micro_dataset(4, 4));
  t.step();
  t.step();
  const auto ck = t.checkpoint("{\"seed\":9}");
  const auto path = (std::filesystem::temp_directory_path() / "varflow_ck_test.vfck").string();
  save_checkpoint(path, ck);
  const auto back = load_checkpoint(path);
  std::filesystem::remove(path);

  EXPECT_EQ(back.config_json, "{\"seed\":9}");
  EXPECT_EQ(back.step, 2);
  EXPECT_TRUE(back.has_optimizer);
  EXPECT_EQ(back.optimizer_steps, 2);
  EXPECT_EQ(back.stats.pitch_mean, unit_stats(4).pitch_mean);
  EXPECT_EQ(back.stats.pitch_std, unit_stats(4).pitch_std);
  EXPECT_EQ(back.stats.energy_mean, unit_stats(4).energy_mean);
  EXPECT_EQ(back.stats.energy_std, unit_stats(4).energy_std);
  ASSERT_EQ(back.parameters.size(), ck.parameters.size());
  for (std::size_t i = 0; i < ck.parameters.size(); ++i) {
    EXPECT_EQ(back.parameters[i].name, ck.parameters[i].name);
    EXPECT_TRUE(same_bits(back.parameters[i].values, ck.parameters[i].values));
    EXPECT_TRUE(same_bits(back.first_moments[i].values, ck.first_moments[i].values));
    EXPECT_TRUE(same_bits(back.second_moments[i].values, ck.second_moments[i].values));
  }
  EXPECT_EQ(encode_checkpoint(back), encode_checkpoint(ck));
}

TEST(Checkpoint, RejectsWrongVersionAndTruncation) {
  auto m = micro_model();
  auto bytes = encode_checkpoint(capture(m, nullptr, 0, "{}"));
  auto wrong = bytes;
  wrong[4] = static_cast<std::uint8_t>(kCheckpointVersion + 1);
  try {
    decode_checkpoint(wrong);
    FAIL() << "expected version rejection";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  for (std::size_t cut : {std::size_t{3}, std::size_t{9}, bytes.size() / 2, bytes.size() - 1}) {
    std::vector<std::uint8_t> part(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(decode_checkpoint(part), DataError) << cut;
  }
}

TEST(Checkpoint, RestoreRejectsShapeMismatch) {
  auto m = micro_model();
  auto ck = capture(m, nullptr, 0, "{}");
  ck.parameters.front().cols += 1;
  auto other = micro_model();
  EXPECT_THROW(restore(ck, other, nullptr), DataError);
}
