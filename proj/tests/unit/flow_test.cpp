#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "test_util.hpp"
#include "varflow/flows/flow.hpp"
#include "varflow/numerics/finite_diff.hpp"
#include "varflow/numerics/ops.hpp"

namespace varflow::flows {
namespace {

using num::Tensor;

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

FlowConfig small_config(int layers = 4, std::size_t channels = 3) {
  FlowConfig c;
  c.layers = layers;
  c.condition_channels = channels;
  c.hidden = 6;
  c.spline.bins = 6;
  return c;
}

Tensor random_matrix(std::size_t rows, std::size_t cols, num::Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(rows * cols);
  for (double& e : v) e = n(rng);
  return Tensor::from(rows, cols, v);
}

std::vector<double> as_vector(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

TEST(Flow, EmptyStackIsIdentity) {
  num::ParameterSet params;
  num::Rng rng(1);
  FlowStack flow(params, "f", small_config(0), rng);
  Tensor x = Tensor::from(3, 1, {0.5, -1.0, 2.0});
  const std::vector<std::uint8_t> mask(3, 1);
  const auto out = flow.forward(x, Tensor::zeros(3, 3), mask);
  EXPECT_EQ(as_vector(out.z), as_vector(x));
  EXPECT_EQ(out.sum_logdet.item(), 0.0);
}

TEST(Flow, FreshStackIsIdentity) {
  num::ParameterSet params;
  num::Rng rng(2);
  FlowStack flow(params, "f", small_config(), rng);
  Tensor x = random_matrix(7, 1, rng);
  Tensor h = random_matrix(7, 3, rng);
  const std::vector<std::uint8_t> mask(7, 1);
  const auto out = flow.forward(x, h, mask);
  for (std::size_t t = 0; t < 7; ++t) EXPECT_NEAR(out.z(t, 0), x(t, 0), 1e-14);
  EXPECT_NEAR(out.sum_logdet.item(), 0.0, 1e-13);
  const std::vector<double> zeros(7, 0.0);
  for (double v : flow.inverse(zeros, h, mask)) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(Flow, IdentityNllMatchesStandardNormal) {
  num::ParameterSet params;
  num::Rng rng(3);
  FlowStack flow(params, "f", small_config(), rng);
  const std::vector<std::uint8_t> mask(4, 1);
  Tensor h = random_matrix(4, 3, rng);
  EXPECT_NEAR(flow.nll(Tensor::zeros(4, 1), h, mask).item(), kHalfLog2Pi, 1e-12);
  EXPECT_NEAR(flow.nll(Tensor::full(4, 1, 1.0), h, mask).item(), kHalfLog2Pi + 0.5, 1e-12);
  EXPECT_NEAR(kHalfLog2Pi, 0.9189385332, 1e-9);
}

double numeric_logdet(const FlowStack& flow, const std::vector<double>& x, const Tensor& h,
                      const std::vector<std::uint8_t>& mask) {
  const std::size_t T = x.size();
  const double eps = 1e-6;
  Eigen::MatrixXd J(T, T);
  num::NoGradGuard guard;
  for (std::size_t j = 0; j < T; ++j) {
    auto up = x, down = x;
    up[j] += eps;
    down[j] -= eps;
    const auto zu = flow.forward(Tensor::column(up), h, mask).z;
    const auto zd = flow.forward(Tensor::column(down), h, mask).z;
    for (std::size_t i = 0; i < T; ++i) J(i, j) = (zu(i, 0) - zd(i, 0)) / (2 * eps);
  }
  return std::log(std::abs(J.determinant()));
}

TEST(Flow, LogdetMatchesNumericalJacobian) {
  num::ParameterSet params;
  num::Rng rng(4);
  FlowStack flow(params, "f", small_config(), rng);
  testing::randomize(params, rng, 0.5);
  for (std::size_t T : {1u, 2u, 3u, 4u}) {
    for (int trial = 0; trial < 20; ++trial) {
      Tensor x = random_matrix(T, 1, rng, 1.5);
      Tensor h = random_matrix(T, 3, rng);
      const std::vector<std::uint8_t> mask(T, 1);
      const auto out = flow.forward(x, h, mask);
      const double expected = numeric_logdet(flow, as_vector(x), h, mask);
      EXPECT_NEAR(out.sum_logdet.item(), expected, 1e-3 * std::max(1.0, std::abs(expected)))
          << "T=" << T;
    }
  }
}

TEST(Flow, LogdetIsSumOfLayers) {
  num::ParameterSet params;
  num::Rng rng(5);
  FlowStack flow(params, "f", small_config(), rng);
  testing::randomize(params, rng, 0.5);
  const std::vector<std::uint8_t> mask(6, 1);
  const auto out = flow.forward(random_matrix(6, 1, rng), random_matrix(6, 3, rng), mask);
  ASSERT_EQ(out.layer_logdets.size(), 4u);
  double total = out.layer_logdets[0].item();
  for (std::size_t i = 1; i < 4; ++i) total += out.layer_logdets[i].item();
  EXPECT_EQ(total, out.sum_logdet.item());
}

TEST(Flow, InverseRoundTrip) {
  num::ParameterSet params;
  num::Rng rng(6);
  FlowStack flow(params, "f", small_config(), rng);
  testing::randomize(params, rng, 0.7);
  double worst = 0.0;
  std::uniform_int_distribution<int> len(1, 12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t T = static_cast<std::size_t>(len(rng));
    Tensor x = random_matrix(T, 1, rng, 2.0);
    Tensor h = random_matrix(T, 3, rng);
    std::vector<std::uint8_t> mask(T, 1);
    if (T > 2 && trial % 3 == 0) mask.back() = 0;
    const auto z = flow.forward(x, h, mask).z;
    const auto back = flow.inverse(as_vector(z), h, mask);
    for (std::size_t t = 0; t < T; ++t) worst = std::max(worst, std::abs(back[t] - x(t, 0)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Flow, OneLayerDensityIntegratesToOne) {
  num::ParameterSet params;
  num::Rng rng(7);
  FlowStack flow(params, "f", small_config(1), rng);
  testing::randomize(params, rng, 0.8);
  const FlowConfig& c = flow.config();
  Tensor h = random_matrix(1, 3, rng);
  const std::vector<std::uint8_t> mask{1};
  const double lo = -c.spline.bound - 3.0, hi = c.spline.bound + 3.0;
  const int n = 40000;
  const double dx = (hi - lo) / n;
  double integral = 0.0;
  num::NoGradGuard guard;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * dx;
    const double density = std::exp(-flow.nll(Tensor::scalar(x), h, mask).item());
    integral += (i == 0 || i == n ? 0.5 : 1.0) * density * dx;
  }
  EXPECT_NEAR(integral, 1.0, 1e-3);
}

TEST(Flow, NllGradientMatchesFiniteDifferences) {
  num::ParameterSet params;
  num::Rng rng(8);
  FlowStack flow(params, "f", small_config(4, 2), rng);
  testing::randomize(params, rng, 0.5);
  Tensor x = random_matrix(5, 1, rng);
  Tensor h = random_matrix(5, 2, rng);
  x.node()->requires_grad = true;
  h.node()->requires_grad = true;
  const std::vector<std::uint8_t> mask{1, 1, 1, 1, 0};
  num::backward(flow.nll(x, h, mask));
  auto f = [&] {
    num::NoGradGuard g;
    return flow.nll(x, h, mask).item();
  };
  for (auto& e : params) {
    const auto numeric = num::finite_diff_grad(f, e.tensor, 1e-6);
    EXPECT_LT(num::relative_error(e.tensor.grad(), numeric, 1e-9), 1e-3) << e.name;
  }
  EXPECT_LT(num::relative_error(x.grad(), num::finite_diff_grad(f, x, 1e-6), 1e-9), 1e-3);
  EXPECT_LT(num::relative_error(h.grad(), num::finite_diff_grad(f, h, 1e-6), 1e-9), 1e-3);
}

TEST(Flow, PaddingDoesNotChangeLikelihood) {
  num::ParameterSet params;
  num::Rng rng(9);
  FlowStack flow(params, "f", small_config(), rng);
  testing::randomize(params, rng, 0.5);
  for (std::size_t T : {4u, 5u}) {
    Tensor x = random_matrix(T, 1, rng);
    Tensor h = random_matrix(T, 3, rng);
    const std::vector<std::uint8_t> mask(T, 1);
    const double base = flow.nll(x, h, mask).item();
    for (std::size_t pad : {1u, 2u, 3u}) {
      Tensor xp = num::concat_rows({x, random_matrix(pad, 1, rng, 3.0)});
      Tensor hp = num::concat_rows({h, random_matrix(pad, 3, rng)});
      std::vector<std::uint8_t> mp(T + pad, 0);
      std::fill(mp.begin(), mp.begin() + static_cast<long>(T), 1);
      EXPECT_NEAR(flow.nll(xp, hp, mp).item(), base, 1e-12) << "T=" << T << " pad=" << pad;
      const auto z = flow.forward(xp, hp, mp).z;
      const auto z0 = flow.forward(x, h, mask).z;
      for (std::size_t t = 0; t < T; ++t) EXPECT_NEAR(z(t, 0), z0(t, 0), 1e-12);
    }
  }
}

TEST(Flow, SamplingWithZeroSigmaIsDeterministic) {
  num::ParameterSet params;
  num::Rng rng(10);
  FlowStack flow(params, "f", small_config(), rng);
  testing::randomize(params, rng, 0.5);
  Tensor h = random_matrix(6, 3, rng);
  const std::vector<std::uint8_t> mask(6, 1);
  num::Rng a(1), b(2);
  const auto s1 = flow.sample(h, mask, 0.0, a);
  const auto s2 = flow.sample(h, mask, 0.0, b);
  EXPECT_EQ(s1.x, s2.x);
  for (double z : s1.z) EXPECT_EQ(z, 0.0);
  EXPECT_THROW(flow.sample(h, mask, -0.1, a), std::invalid_argument);
}

TEST(Flow, SampleSpreadFollowsSigma) {
  num::ParameterSet params;
  num::Rng rng(11);
  FlowStack flow(params, "f", small_config(), rng);
  const std::vector<std::uint8_t> mask(4000, 1);
  Tensor h = Tensor::zeros(4000, 3);
  num::Rng srng(5);
  const auto s = flow.sample(h, mask, 0.333, srng);
  double var = 0.0;
  for (double z : s.z) var += z * z / 4000.0;
  EXPECT_NEAR(std::sqrt(var), 0.333, 0.02);
}

TEST(Flow, RejectsLengthMismatch) {
  num::ParameterSet params;
  num::Rng rng(12);
  FlowStack flow(params, "f", small_config(), rng);
  const std::vector<std::uint8_t> mask(4, 1);
  EXPECT_THROW(flow.forward(Tensor::zeros(3, 1), Tensor::zeros(4, 3), mask), std::invalid_argument);
  EXPECT_THROW(flow.forward(Tensor::zeros(4, 1), Tensor::zeros(4, 2), mask), std::invalid_argument);
  const std::vector<double> z(5, 0.0);
  EXPECT_THROW(flow.inverse(z, Tensor::zeros(4, 3), mask), std::invalid_argument);
}

}  // namespace
}  // namespace varflow::flows
