// Copyright 2026 The hrolf Authors. All Rights Reserved.
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

#include <doctest.h>

#include "hrolf/errors.hpp"
#include "hrolf/ops.hpp"
#include "oracles.hpp"

using namespace hrolf;
using namespace hrolf::testing;

namespace {

double inner(const Tensor<double>& a, const Tensor<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct ConvCase {
  Tensor<double> x, w, b;
  std::size_t stride;
};

ConvCase random_conv_case(Gen& g) {
  const std::size_t n = uniform_size(g, 1, 2), s = uniform_size(g, 1, 4), t = uniform_size(g, 1, 4);
  const std::size_t x = uniform_size(g, 1, 7), y = uniform_size(g, 1, 7);
  const std::size_t ci = uniform_size(g, 1, 4), co = uniform_size(g, 1, 5);
  const std::size_t s1 = odd_size(g, 2), s2 = odd_size(g, 1), a1 = odd_size(g, 1), a2 = odd_size(g, 1);
  return {random_tensor(g, {n, s, t, x, y, ci}), random_tensor(g, {s1, s2, a1, a2, ci, co}),
          random_tensor(g, {co}), uniform_size(g, 1, 3)};
}

}  // namespace

TEST_CASE("conv4d matches the nested-loop oracle on 150 random instances") {
  Gen g(101);
  double worst = 0;
  for (int i = 0; i < 150; ++i) {
    const ConvCase c = random_conv_case(g);
    const Tensor<double> fast = ops::conv4d_forward(c.x, c.w, c.b, c.stride);
    const Tensor<double> slow = naive_conv4d(c.x, c.w, c.b, c.stride);
    REQUIRE(fast.dims() == slow.dims());
    worst = std::max(worst, rel_diff(fast, slow));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("conv4d in float agrees with the double oracle") {
  Gen g(7);
  for (int i = 0; i < 20; ++i) {
    const ConvCase c = random_conv_case(g);
    const Tensor<float> fast =
        ops::conv4d_forward(c.x.cast<float>(), c.w.cast<float>(), c.b.cast<float>(), c.stride);
    CHECK(max_rel_diff(fast, naive_conv4d(c.x.cast<float>().cast<double>(), c.w.cast<float>().cast<double>(),
                                          c.b.cast<float>().cast<double>(), c.stride)) < 1e-5);
  }
}

TEST_CASE("conv4d backward is the adjoint of the forward map") {
  Gen g(33);
  for (int i = 0; i < 60; ++i) {
    ConvCase c = random_conv_case(g);
    const Tensor<double> zero_bias(c.b.dims());
    const Tensor<double> y = ops::conv4d_forward(c.x, c.w, zero_bias, c.stride);
    const Tensor<double> go = random_tensor(g, y.dims());
    const auto grads = ops::conv4d_backward(c.x, c.w, go, c.stride);
    const double lhs = inner(y, go);
    CHECK(inner(grads.input, c.x) == doctest::Approx(lhs).epsilon(1e-10));
    CHECK(inner(grads.weights, c.w) == doctest::Approx(lhs).epsilon(1e-10));
    const std::size_t co = c.b.size();
    for (std::size_t o = 0; o < co; ++o) {
      double sum = 0;
      for (std::size_t k = o; k < go.size(); k += co) sum += go[k];
      CHECK(grads.bias[o] == doctest::Approx(sum).epsilon(1e-12));
    }
    const auto no_input = ops::conv4d_backward(c.x, c.w, go, c.stride, false);
    CHECK(no_input.weights == grads.weights);
  }
}

TEST_CASE("conv4d rejects mismatched shapes and even kernels") {
  Gen g(1);
  const auto x = random_tensor(g, {1, 3, 3, 4, 4, 2});
  CHECK_THROWS_AS(ops::conv4d_forward(x, random_tensor(g, {3, 3, 3, 3, 3, 1}), random_tensor(g, {1})), ShapeError);
  CHECK_THROWS(ops::conv4d_forward(x, random_tensor(g, {2, 3, 3, 3, 2, 1}), random_tensor(g, {1})));
  CHECK_THROWS(ops::conv4d_forward(x, random_tensor(g, {3, 3, 3, 3, 2, 2}), random_tensor(g, {1})));
}

TEST_CASE("AGBN matches the scalar oracle on 120 random instances") {
  Gen g(55);
  double worst = 0;
  for (int i = 0; i < 120; ++i) {
    const std::size_t c = uniform_size(g, 1, 5);
    const auto x = random_tensor(g, {uniform_size(g, 1, 3), uniform_size(g, 1, 4), uniform_size(g, 1, 4),
                                     uniform_size(g, 1, 5), uniform_size(g, 1, 5), c},
                                 -3.0, 5.0);
    const auto gamma = random_tensor(g, {c});
    const auto beta = random_tensor(g, {c});
    const auto st = ops::agbn_statistics(x);
    const auto fast = ops::agbn_apply(x, gamma, beta, st.mean, st.var, 1e-5);
    worst = std::max(worst, rel_diff(fast, naive_agbn(x, gamma, beta, 1e-5)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("AGBN pools statistics over views, not per view") {
  Tensor<double> x({1, 2, 1, 1, 1, 1});
  x[0] = 1.0;
  x[1] = 3.0;
  const auto st = ops::agbn_statistics(x);
  CHECK(st.mean[0] == 2.0);
  CHECK(st.var[0] == 1.0);  // biased
}

TEST_CASE("AGBN of a constant input is exactly beta") {
  Tensor<double> x({2, 3, 3, 4, 4, 2}, 5.25);
  Tensor<double> gamma({2}, 1.7);
  Tensor<double> beta({2});
  beta[0] = 0.3;
  beta[1] = -2.0;
  const auto st = ops::agbn_statistics(x);
  const auto y = ops::agbn_apply(x, gamma, beta, st.mean, st.var, 1e-5);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == beta[i % 2]);
}

TEST_CASE("lrelu") {
  Tensor<double> x({4}, std::vector<double>{-2.0, -0.0, 0.5, 3.0});
  const auto y = ops::lrelu_forward(x, 0.2);
  CHECK(y[0] == doctest::Approx(-0.4));
  CHECK(y[2] == 0.5);
  CHECK(y[3] == 3.0);
  const auto gy = ops::lrelu_backward(x, Tensor<double>({4}, 1.0), 0.2);
  CHECK(gy[0] == 0.2);
  CHECK(gy[3] == 1.0);
}

TEST_CASE("pixel shuffle layout and inverse") {
  Gen g(4);
  const std::size_t r = 2;
  const auto x = random_tensor(g, {2, 2, 3, 3, 4, 3 * r * r});
  const auto y = ops::pixel_shuffle(x, r);
  CHECK(y.dims() == std::vector<std::size_t>{2, 2, 3, 6, 8, 3});
  const FeatureShape xs = x.feature_shape();
  const FeatureShape ys = y.feature_shape();
  auto xi = [&](std::size_t n, std::size_t s, std::size_t t, std::size_t a, std::size_t b, std::size_t c) {
    return ((((n * xs.s + s) * xs.t + t) * xs.x + a) * xs.y + b) * xs.c + c;
  };
  auto yi = [&](std::size_t n, std::size_t s, std::size_t t, std::size_t a, std::size_t b, std::size_t c) {
    return ((((n * ys.s + s) * ys.t + t) * ys.x + a) * ys.y + b) * ys.c + c;
  };
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) CHECK(y[yi(1, 0, 2, r * 2 + i, r * 3 + j, c)] == x[xi(1, 0, 2, 2, 3, c * r * r + i * r + j)]);
  CHECK(ops::pixel_unshuffle(y, r) == x);
  CHECK_THROWS(ops::pixel_shuffle(random_tensor(g, {1, 1, 1, 2, 2, 3}), 2));
}

TEST_CASE("angular interpolation 3 -> 5 inserts midpoints and copies source views") {
  Gen g(8);
  const auto x = random_tensor(g, {1, 3, 3, 2, 2, 1});
  const auto y = ops::angular_interp_forward(x, 5, 5);
  CHECK(y.dims() == std::vector<std::size_t>{1, 5, 5, 2, 2, 1});
  const std::size_t view = 4;
  auto xv = [&](std::size_t s, std::size_t t, std::size_t k) { return x[(s * 3 + t) * view + k]; };
  auto yv = [&](std::size_t s, std::size_t t, std::size_t k) { return y[(s * 5 + t) * view + k]; };
  for (std::size_t k = 0; k < view; ++k) {
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t t = 0; t < 3; ++t) CHECK(yv(2 * s, 2 * t, k) == xv(s, t, k));
    CHECK(yv(1, 0, k) == doctest::Approx(0.5 * (xv(0, 0, k) + xv(1, 0, k))).epsilon(1e-15));
    CHECK(yv(1, 1, k) ==
          doctest::Approx(0.25 * (xv(0, 0, k) + xv(1, 0, k) + xv(0, 1, k) + xv(1, 1, k))).epsilon(1e-14));
  }
}

TEST_CASE("angular taps for the 2x2 -> 8x8 and 3x3 -> 9x9 tasks") {
  const auto t8 = ops::angular_taps(2, 8);
  CHECK(t8[0].base == 0);
  CHECK(t8[0].frac == 0.0);
  CHECK(t8[7].base == 1);
  CHECK(t8[7].frac == 0.0);
  CHECK(t8[3].frac == doctest::Approx(3.0 / 7.0));
  const auto t9 = ops::angular_taps(3, 9);
  CHECK(t9[4].base == 1);
  CHECK(t9[4].frac == 0.0);
  CHECK(t9[8].base == 2);
  CHECK_THROWS(ops::check_angular_interp_args(5, 5, 3, 3));
}

TEST_CASE("angular interpolation backward is the adjoint") {
  Gen g(12);
  for (int i = 0; i < 20; ++i) {
    const std::size_t s = uniform_size(g, 1, 4), t = uniform_size(g, 1, 4);
    // A single view cannot be interpolated, only copied.
    const std::size_t so = s == 1 ? 1 : s + uniform_size(g, 0, 5), to = t == 1 ? 1 : t + uniform_size(g, 0, 5);
    const auto x = random_tensor(g, {1, s, t, 2, 3, 2});
    const auto y = ops::angular_interp_forward(x, so, to);
    const auto go = random_tensor(g, y.dims());
    CHECK(inner(ops::angular_interp_backward(go, s, t), x) == doctest::Approx(inner(y, go)).epsilon(1e-12));
  }
}
