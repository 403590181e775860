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

#include "varflow/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace varflow::num {

namespace {

std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

struct Broadcast {
  std::size_t rows, cols;
  std::size_t a_rs, a_cs, b_rs, b_cs;  // strides (0 when broadcast)
};

Broadcast broadcast_shape(const Tensor& a, const Tensor& b, const char* op) {
  auto dim = [&](std::size_t x, std::size_t y) {
    if (x == y || y == 1) return x;
    if (x == 1) return y;
    throw std::invalid_argument(std::string(op) + ": shapes " + shape_str(a) + " and " +
                                shape_str(b) + " do not broadcast");
  };
  Broadcast bc{};
  bc.rows = dim(a.rows(), b.rows());
  bc.cols = dim(a.cols(), b.cols());
  bc.a_cs = a.cols() == 1 ? 0 : 1;
  bc.a_rs = a.rows() == 1 ? 0 : a.cols();
  bc.b_cs = b.cols() == 1 ? 0 : 1;
  bc.b_rs = b.rows() == 1 ? 0 : b.cols();
  return bc;
}

template <class Fwd, class GradA, class GradB>
Tensor binary(const Tensor& a, const Tensor& b, const char* name, Fwd fwd, GradA ga, GradB gb) {
  const Broadcast bc = broadcast_shape(a, b, name);
  std::vector<double> out(bc.rows * bc.cols);
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t r = 0; r < bc.rows; ++r) {
    for (std::size_t c = 0; c < bc.cols; ++c) {
      out[r * bc.cols + c] = fwd(av[r * bc.a_rs + c * bc.a_cs], bv[r * bc.b_rs + c * bc.b_cs]);
    }
  }
  return make_op(bc.rows, bc.cols, std::move(out), {a, b}, [bc, ga, gb](Node& self) {
    Node& na = *self.parents[0];
    Node& nb = *self.parents[1];
    const auto& g = self.grad;
    const auto& av = na.value;
    const auto& bv = nb.value;
    std::span<double> gav, gbv;
    if (na.requires_grad) gav = na.grad_span();
    if (nb.requires_grad) gbv = nb.grad_span();
    for (std::size_t r = 0; r < bc.rows; ++r) {
      for (std::size_t c = 0; c < bc.cols; ++c) {
        const std::size_t ia = r * bc.a_rs + c * bc.a_cs;
        const std::size_t ib = r * bc.b_rs + c * bc.b_cs;
        const double go = g[r * bc.cols + c];
        if (!gav.empty()) gav[ia] += ga(av[ia], bv[ib], go);
        if (!gbv.empty()) gbv[ib] += gb(av[ia], bv[ib], go);
      }
    }
  });
}

// y = f(x) with dy/dx expressed through (x, y).
template <class Fwd, class Deriv>
Tensor unary(const Tensor& a, Fwd fwd, Deriv deriv) {
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  return make_op(a.rows(), a.cols(), std::move(out), {a}, [deriv](Node& self) {
    Node& na = *self.parents[0];
    auto ga = na.grad_span();
    for (std::size_t i = 0; i < ga.size(); ++i) {
      ga[i] += self.grad[i] * deriv(na.value[i], self.value[i]);
    }
  });
}

double stable_softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double, double g) { return g; }, [](double, double, double g) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double, double g) { return g; }, [](double, double, double g) { return -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y, double g) { return g * y; },
      [](double x, double, double g) { return g * x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "div", [](double x, double y) { return x / y; },
      [](double, double y, double g) { return g / y; },
      [](double x, double y, double g) { return -g * x / (y * y); });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      a, [factor](double x) { return x * factor; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double offset) {
  return unary(
      a, [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor exp(const Tensor& a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor softplus(const Tensor& a) {
  return unary(a, stable_softplus, [](double x, double) { return stable_sigmoid(x); });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](double x) { return x > 0 ? x : 0.0; },
      [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor pow(const Tensor& a, double exponent) {
  return unary(
      a, [exponent](double x) { return std::pow(x, exponent); },
      [exponent](double x, double) { return exponent * std::pow(x, exponent - 1.0); });
}

Tensor square(const Tensor& a) {
  return unary(
      a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  return make_op(1, 1, {total}, {a}, [](Node& self) {
    auto ga = self.parents[0]->grad_span();
    const double g = self.grad[0];
    for (double& v : ga) v += g;
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw std::invalid_argument("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor sum_rows(const Tensor& a) {
  const std::size_t rows = a.rows(), cols = a.cols();
  std::vector<double> out(cols, 0.0);
  const auto av = a.values();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c] += av[r * cols + c];
  return make_op(1, cols, std::move(out), {a}, [rows, cols](Node& self) {
    auto ga = self.parents[0]->grad_span();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += self.grad[c];
  });
}

Tensor sum_cols(const Tensor& a) {
  const std::size_t rows = a.rows(), cols = a.cols();
  std::vector<double> out(rows, 0.0);
  const auto av = a.values();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r] += av[r * cols + c];
  return make_op(rows, 1, std::move(out), {a}, [rows, cols](Node& self) {
    auto ga = self.parents[0]->grad_span();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += self.grad[r];
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: " + shape_str(a) + " @ " + shape_str(b));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double x = av[i * k + p];
      if (x == 0.0) continue;
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += x * brow[j];
    }
  }
  return make_op(m, n, std::move(out), {a, b}, [m, k, n](Node& self) {
    Node& na = *self.parents[0];
    Node& nb = *self.parents[1];
    const double* g = self.grad.data();
    if (na.requires_grad) {
      auto ga = na.grad_span();
      const double* bv = nb.value.data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          const double* grow = g + i * n;
          const double* brow = bv + p * n;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[i * k + p] += acc;
        }
    }
    if (nb.requires_grad) {
      auto gb = nb.grad_span();
      const double* av = na.value.data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double x = av[i * k + p];
          if (x == 0.0) continue;
          const double* grow = g + i * n;
          double* gbrow = gb.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += x * grow[j];
        }
    }
  });
}

Tensor transpose(const Tensor& a) {
  const std::size_t rows = a.rows(), cols = a.cols();
  std::vector<double> out(rows * cols);
  const auto av = a.values();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = av[r * cols + c];
  return make_op(cols, rows, std::move(out), {a}, [rows, cols](Node& self) {
    auto ga = self.parents[0]->grad_span();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += self.grad[c * rows + r];
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: row count mismatch");
    offsets.push_back(cols);
    cols += p.cols();
  }
  std::vector<double> out(rows * cols);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto pv = parts[i].values();
    const std::size_t pc = parts[i].cols();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(pv.data() + r * pc, pc, out.data() + r * cols + offsets[i]);
  }
  return make_op(rows, cols, std::move(out), parts, [rows, cols, offsets](Node& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      Node& p = *self.parents[i];
      if (!p.requires_grad) continue;
      auto gp = p.grad_span();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < p.cols; ++c) gp[r * p.cols + c] += self.grad[r * cols + offsets[i] + c];
    }
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("concat_rows: column count mismatch");
    offsets.push_back(rows * cols);
    rows += p.rows();
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return make_op(rows, cols, std::move(out), parts, [offsets](Node& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      Node& p = *self.parents[i];
      if (!p.requires_grad) continue;
      auto gp = p.grad_span();
      for (std::size_t j = 0; j < gp.size(); ++j) gp[j] += self.grad[offsets[i] + j];
    }
  });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  if (begin > end || end > a.rows()) throw std::out_of_range("slice_rows: bad range");
  const std::size_t cols = a.cols();
  const auto av = a.values();
  std::vector<double> out(av.begin() + begin * cols, av.begin() + end * cols);
  return make_op(end - begin, cols, std::move(out), {a}, [begin, cols](Node& self) {
    auto ga = self.parents[0]->grad_span();
    for (std::size_t j = 0; j < self.grad.size(); ++j) ga[begin * cols + j] += self.grad[j];
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  if (begin > end || end > a.cols()) throw std::out_of_range("slice_cols: bad range");
  const std::size_t rows = a.rows(), cols = a.cols(), w = end - begin;
  const auto av = a.values();
  std::vector<double> out(rows * w);
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(av.data() + r * cols + begin, w, out.data() + r * w);
  return make_op(rows, w, std::move(out), {a}, [rows, cols, w, begin](Node& self) {
    auto ga = self.parents[0]->grad_span();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < w; ++c) ga[r * cols + begin + c] += self.grad[r * w + c];
  });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index) {
  const std::size_t cols = a.cols();
  const auto av = a.values();
  std::vector<double> out(index.size() * cols);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= a.rows()) throw std::out_of_range("gather_rows: index out of range");
    std::copy_n(av.data() + index[i] * cols, cols, out.data() + i * cols);
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return make_op(index.size(), cols, std::move(out), {a}, [idx = std::move(idx), cols](Node& self) {
    auto ga = self.parents[0]->grad_span();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < cols; ++c) ga[idx[i] * cols + c] += self.grad[i * cols + c];
  });
}

Tensor embedding(const Tensor& table, std::span<const int> ids) {
  std::vector<std::size_t> idx(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= table.rows()) {
      throw std::out_of_range("embedding: id " + std::to_string(ids[i]) + " outside vocabulary of " +
                              std::to_string(table.rows()));
    }
    idx[i] = static_cast<std::size_t>(ids[i]);
  }
  return gather_rows(table, idx);
}

Tensor softmax_rows(const Tensor& a) {
  const std::size_t rows = a.rows(), cols = a.cols();
  const auto av = a.values();
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = av.data() + r * cols;
    double* y = out.data() + r * cols;
    const double mx = *std::max_element(x, x + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - mx);
      z += y[c];
    }
    for (std::size_t c = 0; c < cols; ++c) y[c] /= z;
  }
  return make_op(rows, cols, std::move(out), {a}, [rows, cols](Node& self) {
    auto ga = self.parents[0]->grad_span();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * cols;
      const double* g = self.grad.data() + r * cols;
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[c] * y[c];
      for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += y[c] * (g[c] - dot);
    }
  });
}

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps) {
  const std::size_t rows = a.rows(), cols = a.cols();
  if (gain.size() != cols || bias.size() != cols) {
    throw std::invalid_argument("layer_norm: gain/bias size must match " + std::to_string(cols));
  }
  const auto av = a.values();
  const auto gv = gain.values();
  const auto bv = bias.values();
  std::vector<double> out(rows * cols);
  // normalized values and inverse std, saved for the adjoint
  std::vector<double> xhat(rows * cols);
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = av.data() + r * cols;
    double mu = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mu += x[c];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (x[c] - mu) * (x[c] - mu);
    var /= static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      xhat[r * cols + c] = (x[c] - mu) * inv_std[r];
      out[r * cols + c] = xhat[r * cols + c] * gv[c] + bv[c];
    }
  }
  return make_op(rows, cols, std::move(out), {a, gain, bias},
                 [rows, cols, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
                   Node& na = *self.parents[0];
                   Node& ng = *self.parents[1];
                   Node& nb = *self.parents[2];
                   const double* g = self.grad.data();
                   if (ng.requires_grad) {
                     auto gg = ng.grad_span();
                     for (std::size_t r = 0; r < rows; ++r)
                       for (std::size_t c = 0; c < cols; ++c) gg[c] += g[r * cols + c] * xhat[r * cols + c];
                   }
                   if (nb.requires_grad) {
                     auto gb = nb.grad_span();
                     for (std::size_t r = 0; r < rows; ++r)
                       for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
                   }
                   if (na.requires_grad) {
                     auto ga = na.grad_span();
                     const double n = static_cast<double>(cols);
                     std::vector<double> gh(cols);
                     for (std::size_t r = 0; r < rows; ++r) {
                       double s1 = 0.0, s2 = 0.0;
                       for (std::size_t c = 0; c < cols; ++c) {
                         gh[c] = g[r * cols + c] * ng.value[c];
                         s1 += gh[c];
                         s2 += gh[c] * xhat[r * cols + c];
                       }
                       for (std::size_t c = 0; c < cols; ++c) {
                         ga[r * cols + c] +=
                             inv_std[r] * (gh[c] - s1 / n - xhat[r * cols + c] * s2 / n);
                       }
                     }
                   }
                 });
}

Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias, std::size_t kernel) {
  if (kernel % 2 == 0) throw std::invalid_argument("conv1d: kernel must be odd");
  const std::size_t T = input.rows(), cin = input.cols(), cout = weight.cols();
  if (weight.rows() != kernel * cin) {
    throw std::invalid_argument("conv1d: weight " + shape_str(weight) + " does not match kernel " +
                                std::to_string(kernel) + " x " + std::to_string(cin) + " inputs");
  }
  if (bias.size() != cout) throw std::invalid_argument("conv1d: bias size mismatch");
  const long pad = static_cast<long>(kernel / 2);
  const auto xv = input.values();
  const auto wv = weight.values();
  const auto bv = bias.values();
  std::vector<double> out(T * cout);
  for (std::size_t t = 0; t < T; ++t) std::copy(bv.begin(), bv.end(), out.begin() + t * cout);
  for (std::size_t j = 0; j < kernel; ++j) {
    for (std::size_t t = 0; t < T; ++t) {
      const long src = static_cast<long>(t) + static_cast<long>(j) - pad;
      if (src < 0 || src >= static_cast<long>(T)) continue;
      const double* x = xv.data() + static_cast<std::size_t>(src) * cin;
      double* o = out.data() + t * cout;
      for (std::size_t c = 0; c < cin; ++c) {
        const double xc = x[c];
        if (xc == 0.0) continue;
        const double* w = wv.data() + (j * cin + c) * cout;
        for (std::size_t q = 0; q < cout; ++q) o[q] += xc * w[q];
      }
    }
  }
  return make_op(T, cout, std::move(out), {input, weight, bias}, [T, cin, cout, kernel, pad](Node& self) {
    Node& nx = *self.parents[0];
    Node& nw = *self.parents[1];
    Node& nb = *self.parents[2];
    const double* g = self.grad.data();
    if (nb.requires_grad) {
      auto gb = nb.grad_span();
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t q = 0; q < cout; ++q) gb[q] += g[t * cout + q];
    }
    std::span<double> gx, gw;
    if (nx.requires_grad) gx = nx.grad_span();
    if (nw.requires_grad) gw = nw.grad_span();
    for (std::size_t j = 0; j < kernel; ++j) {
      for (std::size_t t = 0; t < T; ++t) {
        const long src = static_cast<long>(t) + static_cast<long>(j) - pad;
        if (src < 0 || src >= static_cast<long>(T)) continue;
        const std::size_t s = static_cast<std::size_t>(src);
        const double* go = g + t * cout;
        for (std::size_t c = 0; c < cin; ++c) {
          const std::size_t wrow = (j * cin + c) * cout;
          if (!gx.empty()) {
            const double* w = nw.value.data() + wrow;
            double acc = 0.0;
            for (std::size_t q = 0; q < cout; ++q) acc += go[q] * w[q];
            gx[s * cin + c] += acc;
          }
          if (!gw.empty()) {
            const double xc = nx.value[s * cin + c];
            if (xc == 0.0) continue;
            double* gwr = gw.data() + wrow;
            for (std::size_t q = 0; q < cout; ++q) gwr[q] += xc * go[q];
          }
        }
      }
    }
  });
}

Tensor dropout(const Tensor& a, double p, Rng& rng) {
  if (p <= 0.0) return a;
  if (p >= 1.0) throw std::invalid_argument("dropout: p must be < 1");
  std::bernoulli_distribution keep(1.0 - p);
  std::vector<double> m(a.size());
  const double s = 1.0 / (1.0 - p);
  for (double& v : m) v = keep(rng) ? s : 0.0;
  return mul(a, Tensor::from(a.rows(), a.cols(), std::move(m)));
}

Tensor scaled_dot_product_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                                    const Tensor& key_bias) {
  const double inv = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Tensor scores = scale(matmul(q, transpose(k)), inv);
  return matmul(softmax_rows(add(scores, key_bias)), v);
}

Tensor mask_column(std::span<const std::uint8_t> mask) {
  std::vector<double> m(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) m[i] = mask[i] ? 1.0 : 0.0;
  return Tensor::from(mask.size(), 1, std::move(m));
}

}  // namespace varflow::num
