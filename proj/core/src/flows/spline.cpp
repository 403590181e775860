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

#include "varflow/flows/spline.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

#include "varflow/errors.hpp"

namespace varflow::flows {

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Shift so that min_derivative + softplus(0 + shift) == 1.
double derivative_shift(const SplineConfig& c) { return std::log(std::expm1(1.0 - c.min_derivative)); }

void softmax(std::span<const double> in, std::vector<double>& out) {
  out.resize(in.size());
  const double mx = *std::max_element(in.begin(), in.end());
  double z = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - mx);
    z += out[i];
  }
  for (double& v : out) v /= z;
}

// Knot positions from raw bin sizes; also returns the softmax used.
void knots_from_raw(std::span<const double> raw, double min_bin, double bound,
                    std::vector<double>& knots, std::vector<double>& probs) {
  const std::size_t bins = raw.size();
  softmax(raw, probs);
  knots.assign(bins + 1, 0.0);
  knots[0] = -bound;
  double cum = 0.0;
  const double spread = 1.0 - min_bin * static_cast<double>(bins);
  for (std::size_t k = 1; k < bins; ++k) {
    cum += min_bin + spread * probs[k - 1];
    knots[k] = -bound + 2.0 * bound * cum;
  }
  knots[bins] = bound;
}

std::size_t find_bin(const std::vector<double>& knots, double v) {
  // Largest k with knots[k] <= v, clamped to the last bin.
  const auto it = std::upper_bound(knots.begin() + 1, knots.end() - 1, v);
  return static_cast<std::size_t>(it - knots.begin()) - 1;
}

void check_finite(std::span<const double> raw) {
  for (double v : raw) {
    if (!std::isfinite(v)) throw NumericalError("rational-quadratic spline: non-finite parameter");
  }
}

struct Pieces {
  std::vector<double> wprob, hprob;
  SplineKnots knots;
};

Pieces build(const SplineParams& p) {
  const SplineConfig& c = *p.config;
  const std::size_t bins = static_cast<std::size_t>(c.bins);
  if (p.raw.size() != c.raw_size()) {
    throw std::invalid_argument("spline: expected " + std::to_string(c.raw_size()) + " raw values, got " +
                                std::to_string(p.raw.size()));
  }
  check_finite(p.raw);
  Pieces out;
  knots_from_raw(p.raw.subspan(0, bins), c.min_bin_width, c.bound, out.knots.x, out.wprob);
  knots_from_raw(p.raw.subspan(bins, bins), c.min_bin_height, c.bound, out.knots.y, out.hprob);
  out.knots.d.assign(bins + 1, 1.0);
  const double shift = derivative_shift(c);
  for (std::size_t k = 1; k < bins; ++k) {
    out.knots.d[k] = c.min_derivative + softplus(p.raw[2 * bins + k - 1] + shift);
  }
  return out;
}

bool inside(double v, double bound) { return v >= -bound && v <= bound; }

}  // namespace

void SplineConfig::validate() const {
  if (bins < 1) throw std::invalid_argument("spline: bins must be >= 1");
  if (!(bound > 0.0)) throw std::invalid_argument("spline: bound must be positive");
  if (min_bin_width * bins >= 1.0 || min_bin_height * bins >= 1.0) {
    throw std::invalid_argument("spline: minimum bin size too large for bin count");
  }
  if (!(min_derivative > 0.0) || min_derivative >= 1.0) {
    throw std::invalid_argument("spline: min_derivative must be in (0, 1)");
  }
}

SplineKnots constrain(const SplineParams& p) { return build(p).knots; }

SplineValue rq_spline_forward(double x, const SplineParams& p) {
  const double bound = p.config->bound;
  if (!inside(x, bound)) {
    check_finite(p.raw);
    return {x, 0.0};
  }
  const SplineKnots kn = build(p).knots;
  const std::size_t k = find_bin(kn.x, x);
  const double w = kn.x[k + 1] - kn.x[k];
  const double h = kn.y[k + 1] - kn.y[k];
  const double s = h / w;
  const double xi = (x - kn.x[k]) / w;
  const double t = xi * (1.0 - xi);
  const double dl = kn.d[k], dr = kn.d[k + 1];
  const double num = h * (s * xi * xi + dl * t);
  const double den = s + (dr + dl - 2.0 * s) * t;
  const double deriv =
      s * s * (dr * xi * xi + 2.0 * s * t + dl * (1.0 - xi) * (1.0 - xi)) / (den * den);
  return {kn.y[k] + num / den, std::log(deriv)};
}

SplineValue rq_spline_inverse(double y, const SplineParams& p) {
  const double bound = p.config->bound;
  if (!inside(y, bound)) {
    check_finite(p.raw);
    return {y, 0.0};
  }
  const SplineKnots kn = build(p).knots;
  const std::size_t k = find_bin(kn.y, y);
  assert(k + 1 < kn.y.size());
  const double w = kn.x[k + 1] - kn.x[k];
  const double h = kn.y[k + 1] - kn.y[k];
  const double s = h / w;
  const double dl = kn.d[k], dr = kn.d[k + 1];
  const double dy = y - kn.y[k];
  const double curv = dr + dl - 2.0 * s;
  const double a = h * (s - dl) + dy * curv;
  const double b = h * dl - dy * curv;
  const double c = -s * dy;
  const double disc = std::max(b * b - 4.0 * a * c, 0.0);
  double xi = (c == 0.0) ? 0.0 : (2.0 * c) / (-b - std::sqrt(disc));
  xi = std::clamp(xi, 0.0, 1.0);
  const double x = kn.x[k] + xi * w;
  const double t = xi * (1.0 - xi);
  const double den = s + curv * t;
  const double deriv =
      s * s * (dr * xi * xi + 2.0 * s * t + dl * (1.0 - xi) * (1.0 - xi)) / (den * den);
  return {x, -std::log(deriv)};
}

void rq_spline_backward(double x, const SplineParams& p, double gy, double gl, double& grad_x,
                        std::span<double> grad_raw) {
  const SplineConfig& cfg = *p.config;
  if (!inside(x, cfg.bound)) {
    grad_x += gy;
    return;
  }
  const Pieces pc = build(p);
  const SplineKnots& kn = pc.knots;
  const std::size_t bins = static_cast<std::size_t>(cfg.bins);
  const std::size_t k = find_bin(kn.x, x);

  // Forward quantities.
  const double xl = kn.x[k], xr = kn.x[k + 1], yl = kn.y[k], yr = kn.y[k + 1];
  const double dl = kn.d[k], dr = kn.d[k + 1];
  const double w = xr - xl, h = yr - yl;
  const double s = h / w;
  const double xi = (x - xl) / w;
  const double t = xi * (1.0 - xi);
  const double A = s * xi * xi + dl * t;
  const double num = h * A;
  const double den = s + (dr + dl - 2.0 * s) * t;
  const double E = dr * xi * xi + 2.0 * s * t + dl * (1.0 - xi) * (1.0 - xi);
  const double D = s * s * E;

  // Reverse sweep: y = yl + num/den, logdet = log D - 2 log den.
  double g_yl = gy, g_yr = 0.0, g_xl = 0.0, g_xr = 0.0, g_dl = 0.0, g_dr = 0.0;
  const double g_num = gy / den;
  const double g_den = -gy * num / (den * den) - 2.0 * gl / den;
  const double g_D = gl / D;
  double g_s = 0.0, g_xi = 0.0, g_t = 0.0, g_h = 0.0, g_w = 0.0;

  g_h += g_num * A;
  const double g_A = g_num * h;
  g_s += g_A * xi * xi;
  g_xi += g_A * 2.0 * s * xi;
  g_dl += g_A * t;
  g_t += g_A * dl;

  g_s += g_den * (1.0 - 2.0 * t);
  g_dr += g_den * t;
  g_dl += g_den * t;
  g_t += g_den * (dr + dl - 2.0 * s);

  g_s += g_D * 2.0 * s * E;
  const double g_E = g_D * s * s;
  g_dr += g_E * xi * xi;
  g_s += g_E * 2.0 * t;
  g_t += g_E * 2.0 * s;
  g_dl += g_E * (1.0 - xi) * (1.0 - xi);
  g_xi += g_E * (2.0 * dr * xi - 2.0 * dl * (1.0 - xi));

  g_xi += g_t * (1.0 - 2.0 * xi);

  grad_x += g_xi / w;
  g_xl -= g_xi / w;
  g_w -= g_xi * xi / w;

  g_h += g_s / w;
  g_w -= g_s * s / w;

  g_xr += g_w;
  g_xl -= g_w;
  g_yr += g_h;
  g_yl -= g_h;

  if (grad_raw.empty()) return;

  // Knots -> bin sizes -> softmax logits. Only interior knots depend on raw.
  auto knot_to_logits = [&](double g_left, double g_right, const std::vector<double>& probs,
                            double min_bin, std::span<double> out) {
    std::vector<double> g_size(bins, 0.0);
    auto spread_knot = [&](std::size_t j, double g) {
      if (j == 0 || j == bins || g == 0.0) return;
      for (std::size_t i = 0; i < j; ++i) g_size[i] += 2.0 * cfg.bound * g;
    };
    spread_knot(k, g_left);
    spread_knot(k + 1, g_right);
    const double spread = 1.0 - min_bin * static_cast<double>(bins);
    double dot = 0.0;
    for (std::size_t i = 0; i < bins; ++i) dot += g_size[i] * probs[i];
    for (std::size_t i = 0; i < bins; ++i) out[i] += spread * probs[i] * (g_size[i] - dot);
  };
  knot_to_logits(g_xl, g_xr, pc.wprob, cfg.min_bin_width, grad_raw.subspan(0, bins));
  knot_to_logits(g_yl, g_yr, pc.hprob, cfg.min_bin_height, grad_raw.subspan(bins, bins));

  const double shift = derivative_shift(cfg);
  auto deriv_to_raw = [&](std::size_t j, double g) {
    if (j == 0 || j == bins) return;
    grad_raw[2 * bins + j - 1] += g * sigmoid(p.raw[2 * bins + j - 1] + shift);
  };
  deriv_to_raw(k, g_dl);
  deriv_to_raw(k + 1, g_dr);
}

num::Tensor rq_spline(const num::Tensor& x, const num::Tensor& raw, const SplineConfig& config) {
  const std::size_t n = x.rows();
  const std::size_t width = config.raw_size();
  if (x.cols() != 1 || raw.rows() != n || raw.cols() != width) {
    throw std::invalid_argument("rq_spline: expected x n x 1 and raw n x " + std::to_string(width));
  }
  std::vector<double> out(2 * n);
  const auto xv = x.values();
  const auto rv = raw.values();
  for (std::size_t i = 0; i < n; ++i) {
    const SplineParams p{rv.subspan(i * width, width), &config};
    const SplineValue v = rq_spline_forward(xv[i], p);
    out[2 * i] = v.value;
    out[2 * i + 1] = v.logdet;
  }
  return num::make_op(n, 2, std::move(out), {x, raw}, [n, width, config](num::Node& self) {
    num::Node& nx = *self.parents[0];
    num::Node& nr = *self.parents[1];
    std::span<double> gx, gr;
    if (nx.requires_grad) gx = nx.grad_span();
    if (nr.requires_grad) gr = nr.grad_span();
    for (std::size_t i = 0; i < n; ++i) {
      const double gy = self.grad[2 * i];
      const double gl = self.grad[2 * i + 1];
      if (gy == 0.0 && gl == 0.0) continue;
      const SplineParams p{std::span<const double>(nr.value).subspan(i * width, width), &config};
      double gxi = 0.0;
      rq_spline_backward(nx.value[i], p, gy, gl, gxi,
                         gr.empty() ? std::span<double>() : gr.subspan(i * width, width));
      if (!gx.empty()) gx[i] += gxi;
    }
  });
}

}  // namespace varflow::flows
