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

#include "varflow/flows/flow.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace varflow::flows {

using num::Tensor;

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

struct Squeezed {
  std::size_t length = 0;   // original T
  std::size_t pairs = 0;    // ceil(T / 2)
  std::vector<std::size_t> even, odd, unsqueeze;
  std::vector<std::uint8_t> channel_mask[2];
  Tensor channel_mask_t[2];
  Tensor pair_mask;
  Tensor h;                  // pairs x 2C
};

Squeezed squeeze_layout(const Tensor& h, std::span<const std::uint8_t> mask) {
  Squeezed s;
  s.length = mask.size();
  s.pairs = (s.length + 1) / 2;
  for (std::size_t j = 0; j < s.pairs; ++j) {
    s.even.push_back(2 * j);
    s.odd.push_back(2 * j + 1);
  }
  std::vector<std::uint8_t> padded(mask.begin(), mask.end());
  if (s.length % 2 == 1) padded.push_back(0);
  std::vector<std::uint8_t> pair(s.pairs);
  for (std::size_t j = 0; j < s.pairs; ++j) {
    s.channel_mask[0].push_back(padded[2 * j]);
    s.channel_mask[1].push_back(padded[2 * j + 1]);
    pair[j] = (padded[2 * j] || padded[2 * j + 1]) ? 1 : 0;
  }
  s.channel_mask_t[0] = num::mask_column(s.channel_mask[0]);
  s.channel_mask_t[1] = num::mask_column(s.channel_mask[1]);
  s.pair_mask = num::mask_column(pair);
  for (std::size_t t = 0; t < s.length; ++t) {
    s.unsqueeze.push_back(t % 2 == 0 ? t / 2 : s.pairs + t / 2);
  }

  Tensor hm = num::mul(h, num::mask_column(mask));
  if (s.length % 2 == 1) hm = num::concat_rows({hm, Tensor::zeros(1, h.cols())});
  s.h = num::concat_cols({num::gather_rows(hm, s.even), num::gather_rows(hm, s.odd)});
  return s;
}

void check_lengths(std::size_t x_len, const Tensor& h, std::size_t mask_len, std::size_t channels) {
  if (x_len != h.rows() || x_len != mask_len) {
    throw std::invalid_argument("flow: length mismatch (x " + std::to_string(x_len) + ", h " +
                                std::to_string(h.rows()) + ", mask " + std::to_string(mask_len) + ")");
  }
  if (h.cols() != channels) {
    throw std::invalid_argument("flow: h has " + std::to_string(h.cols()) + " channels, expected " +
                                std::to_string(channels));
  }
  if (x_len == 0) throw std::invalid_argument("flow: empty sequence");
}

}  // namespace

double standard_normal_logpdf(double v) { return -0.5 * v * v - kHalfLog2Pi; }

CouplingLayer::CouplingLayer(num::ParameterSet& params, const std::string& name, const FlowConfig& config,
                             int parity, num::Rng& rng)
    : parity_(parity) {
  const std::size_t in = 1 + 2 * config.condition_channels;
  conv1_ = num::Conv1d(params, name + ".conv1", in, config.hidden, config.kernel, rng);
  norm1_ = num::LayerNorm(params, name + ".norm1", config.hidden);
  conv2_ = num::Conv1d(params, name + ".conv2", config.hidden, config.hidden, config.kernel, rng);
  norm2_ = num::LayerNorm(params, name + ".norm2", config.hidden);
  proj_ = num::Linear(params, name + ".proj", config.hidden, config.spline.raw_size(), rng, num::Init::zeros);
}

Tensor CouplingLayer::condition(const Tensor& identity, const Tensor& identity_mask, const Tensor& h_squeezed,
                                const Tensor& pair_mask) const {
  Tensor in = num::concat_cols({num::mul(identity, identity_mask), h_squeezed});
  Tensor a = num::mul(num::tanh(norm1_(conv1_(in))), pair_mask);
  Tensor b = num::mul(num::tanh(norm2_(conv2_(a))), pair_mask);
  return proj_(b);
}

FlowStack::FlowStack(num::ParameterSet& params, const std::string& name, const FlowConfig& config,
                     num::Rng& rng)
    : config_(config) {
  config_.spline.validate();
  if (config.layers < 0) throw std::invalid_argument("flow: negative layer count");
  for (int i = 0; i < config.layers; ++i) {
    layers_.emplace_back(params, name + ".layer" + std::to_string(i), config_, i % 2, rng);
  }
}

FlowForward FlowStack::forward(const Tensor& x, const Tensor& h, std::span<const std::uint8_t> mask) const {
  check_lengths(x.rows(), h, mask.size(), config_.condition_channels);
  if (x.cols() != 1) throw std::invalid_argument("flow: x must be T x 1");
  FlowForward out;
  if (layers_.empty()) {
    out.z = x;
    out.sum_logdet = Tensor::scalar(0.0);
    return out;
  }
  const Squeezed sq = squeeze_layout(h, mask);
  const std::size_t T = sq.length;
  Tensor xp = (T % 2 == 1) ? num::concat_rows({x, num::slice_rows(x, T - 1, T)}) : x;
  Tensor ch[2] = {num::gather_rows(xp, sq.even), num::gather_rows(xp, sq.odd)};

  Tensor total;
  for (const auto& layer : layers_) {
    const int p = layer.parity();
    const Tensor& m = sq.channel_mask_t[p];
    Tensor raw = layer.condition(ch[1 - p], sq.channel_mask_t[1 - p], sq.h, sq.pair_mask);
    Tensor yl = rq_spline(ch[p], raw, config_.spline);
    Tensor y = num::slice_cols(yl, 0, 1);
    Tensor ld = num::sum(num::mul(num::slice_cols(yl, 1, 2), m));
    // Masked slots pass through unchanged.
    ch[p] = num::add(num::mul(y, m), num::mul(ch[p], num::add_scalar(num::neg(m), 1.0)));
    out.layer_logdets.push_back(ld);
    total = total.defined() ? num::add(total, ld) : ld;
  }
  out.z = num::gather_rows(num::concat_rows({ch[0], ch[1]}), sq.unsqueeze);
  out.sum_logdet = total;
  return out;
}

std::vector<double> FlowStack::inverse(std::span<const double> z, const Tensor& h,
                                       std::span<const std::uint8_t> mask) const {
  check_lengths(z.size(), h, mask.size(), config_.condition_channels);
  if (layers_.empty()) return {z.begin(), z.end()};
  num::NoGradGuard no_grad;
  const Squeezed sq = squeeze_layout(h, mask);
  const std::size_t T = sq.length;
  std::vector<double> ch[2];
  for (std::size_t j = 0; j < sq.pairs; ++j) {
    ch[0].push_back(z[2 * j]);
    ch[1].push_back(2 * j + 1 < T ? z[2 * j + 1] : z[T - 1]);
  }
  const std::size_t width = config_.spline.raw_size();
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    const int p = it->parity();
    Tensor raw = it->condition(Tensor::column(ch[1 - p]), sq.channel_mask_t[1 - p], sq.h, sq.pair_mask);
    const auto rv = raw.values();
    for (std::size_t j = 0; j < sq.pairs; ++j) {
      if (!sq.channel_mask[p][j]) continue;
      const SplineParams params{rv.subspan(j * width, width), &config_.spline};
      ch[p][j] = rq_spline_inverse(ch[p][j], params).value;
    }
  }
  std::vector<double> x(T);
  for (std::size_t t = 0; t < T; ++t) x[t] = (t % 2 == 0) ? ch[0][t / 2] : ch[1][t / 2];
  return x;
}

Tensor FlowStack::nll_sum(const FlowForward& fwd, std::span<const std::uint8_t> mask) const {
  double real = 0.0;
  for (auto m : mask) real += m ? 1.0 : 0.0;
  Tensor m = num::mask_column(mask);
  Tensor quad = num::scale(num::sum(num::mul(num::square(fwd.z), m)), 0.5);
  return num::sub(num::add_scalar(quad, kHalfLog2Pi * real), fwd.sum_logdet);
}

Tensor FlowStack::nll(const Tensor& x, const Tensor& h, std::span<const std::uint8_t> mask) const {
  double real = 0.0;
  for (auto m : mask) real += m ? 1.0 : 0.0;
  if (real == 0.0) return Tensor::scalar(0.0);
  return num::scale(nll_sum(forward(x, h, mask), mask), 1.0 / real);
}

FlowSample FlowStack::sample(const Tensor& h, std::span<const std::uint8_t> mask, double sigma,
                             num::Rng& rng) const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("flow sample: sigma must be >= 0");
  FlowSample s;
  s.z.assign(mask.size(), 0.0);
  if (sigma > 0.0) {
    std::normal_distribution<double> normal(0.0, sigma);
    for (std::size_t t = 0; t < mask.size(); ++t) {
      if (mask[t]) s.z[t] = normal(rng);
    }
  }
  s.x = inverse(s.z, h, mask);
  return s;
}

}  // namespace varflow::flows
