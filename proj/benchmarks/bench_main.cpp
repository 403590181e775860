#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "varflow/flows/flow.hpp"
#include "varflow/flows/spline.hpp"
#include "varflow/model/acoustic_model.hpp"
#include "varflow/training/trainer.hpp"

using namespace varflow;

namespace {

struct SplineInputs {
  flows::SplineConfig cfg;
  std::vector<std::vector<double>> raw;
  std::vector<double> x;

  SplineInputs() {
    num::Rng rng(1);
    std::normal_distribution<double> n(0.0, 1.5);
    for (int i = 0; i < 256; ++i) {
      raw.emplace_back(cfg.raw_size());
      for (double& r : raw.back()) r = n(rng);
      x.push_back(n(rng));
    }
  }
};

void BM_SplineForward(benchmark::State& state) {
  const SplineInputs in;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto k = i++ & 255;
    benchmark::DoNotOptimize(flows::rq_spline_forward(in.x[k], {in.raw[k], &in.cfg}));
  }
}
BENCHMARK(BM_SplineForward);

void BM_SplineInverse(benchmark::State& state) {
  const SplineInputs in;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto k = i++ & 255;
    benchmark::DoNotOptimize(flows::rq_spline_inverse(in.x[k], {in.raw[k], &in.cfg}));
  }
}
BENCHMARK(BM_SplineInverse);

void BM_FlowNll(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  num::Rng rng(2);
  num::ParameterSet params;
  flows::FlowStack flow(params, "f", {}, rng);
  std::normal_distribution<double> n;
  std::vector<double> x(T), h(T * 32);
  for (double& v : x) v = n(rng);
  for (double& v : h) v = n(rng);
  const auto xt = num::Tensor::column(x);
  const auto ht = num::Tensor::from(T, 32, h);
  const std::vector<std::uint8_t> mask(T, 1);
  for (auto _ : state) {
    auto loss = flow.nll(xt, ht, mask);
    num::backward(loss);
    params.zero_grad();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(T));
}
BENCHMARK(BM_FlowNll)->Arg(64)->Arg(256);

void BM_TrainStep(benchmark::State& state) {
  model::ModelConfig cfg;
  cfg.vocab_size = 8;
  num::Rng rng(3);
  std::uniform_int_distribution<int> sym(0, 7), dur(3, 10);
  std::normal_distribution<double> n;
  std::vector<model::TrainingExample> data;
  for (int u = 0; u < 8; ++u) {
    model::TrainingExample ex;
    for (int p = 0; p < 6; ++p) {
      ex.phonemes.push_back(sym(rng));
      ex.durations.push_back(dur(rng));
    }
    ex.phoneme_mask.assign(ex.phonemes.size(), 1);
    int frames = 0;
    for (int d : ex.durations) frames += d;
    const auto T = static_cast<std::size_t>(frames);
    ex.frame_mask.assign(T, 1);
    ex.mel = num::Matrix(T, cfg.n_mels);
    for (double& v : ex.mel.data()) v = n(rng);
    for (std::size_t t = 0; t < T; ++t) {
      ex.pitch.push_back(n(rng));
      ex.energy.push_back(n(rng));
    }
    data.push_back(std::move(ex));
  }
  model::AcousticModel m(cfg, 3);
  training::TrainConfig tc;
  tc.batch_size = 8;
  training::Trainer trainer(m, tc, data);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.step());
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
