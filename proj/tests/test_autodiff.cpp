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

#include "hrolf/autodiff.hpp"
#include "hrolf/errors.hpp"
#include "hrolf/gradcheck.hpp"
#include "hrolf/gradcheck_suite.hpp"
#include "oracles.hpp"

using namespace hrolf;
using namespace hrolf::testing;

TEST_CASE("hconv4d on a 2x2x3x3x1 input passes the finite-difference check") {
  Gen g(2);
  const auto probe = random_tensor(g, {1, 2, 2, 3, 3, 2});
  const auto report = grad_check(
      [&](ad::Tape<double>& t, std::span<const ad::Var> v) {
        return ad::dot(t, ad::hconv4d(t, v[0], v[1], v[2]), probe);
      },
      {{"x", random_tensor(g, {1, 2, 2, 3, 3, 1})},
       {"w", random_tensor(g, {3, 3, 3, 3, 1, 2})},
       {"b", random_tensor(g, {2})}},
      1e-4, 1e-3);
  CHECK(report.pass());
}

TEST_CASE("agbn train mode differentiates through the statistics") {
  Gen g(3);
  const auto probe = random_tensor(g, {2, 2, 2, 3, 3, 2});
  auto fn = [&](ad::NormMode mode) {
    return [&, mode](ad::Tape<double>& t, std::span<const ad::Var> v) {
      ad::AgbnOptions o;
      o.mode = mode;
      ad::RunningStats rs{{0.1, -0.2}, {1.5, 0.7}};
      o.running = &rs;
      return ad::dot(t, ad::agbn(t, v[0], v[1], v[2], o), probe);
    };
  };
  const std::vector<GradCheckInput> in{{"x", random_tensor(g, {2, 2, 2, 3, 3, 2})},
                                       {"gamma", random_tensor(g, {2})},
                                       {"beta", random_tensor(g, {2})}};
  CHECK(grad_check(fn(ad::NormMode::kTrain), in, 1e-4, 1e-5, 1e-4).pass());
  CHECK(grad_check(fn(ad::NormMode::kEval), in, 1e-6, 1e-5, 1e-4).pass());
}

TEST_CASE("angular_interp is linear so it passes at 1e-6") {
  Gen g(4);
  const auto probe = random_tensor(g, {1, 9, 9, 2, 2, 1});
  const auto report = grad_check(
      [&](ad::Tape<double>& t, std::span<const ad::Var> v) {
        return ad::dot(t, ad::angular_interp(t, v[0], 9, 9), probe);
      },
      {{"x", random_tensor(g, {1, 3, 3, 2, 2, 1})}}, 1e-6, 1e-3);
  CHECK(report.pass());
}

TEST_CASE("reductions and combinations") {
  Gen g(5);
  const auto a = random_tensor(g, {2, 3});
  const auto b = random_tensor(g, {2, 3});
  double sq = 0;
  for (std::size_t i = 0; i < 6; ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  ad::Tape<double> t;
  const ad::Var va = t.parameter(a);
  const ad::Var vb = t.constant(b);
  CHECK(t.value(ad::squared_error(t, va, vb, ad::Reduction::kSum)).item() == doctest::Approx(sq));
  CHECK(t.value(ad::squared_error(t, va, vb, ad::Reduction::kMean)).item() == doctest::Approx(sq / 6));
  const ad::Var s1 = ad::sum(t, va);
  const ad::Var s2 = ad::sum(t, vb);
  const ad::Var lc = ad::linear_combination(t, s1, 2.0, s2, -3.0);
  double sa = 0, sb = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    sa += a[i];
    sb += b[i];
  }
  CHECK(t.value(lc).item() == doctest::Approx(2 * sa - 3 * sb));
  t.backward(lc);
  for (std::size_t i = 0; i < 6; ++i) CHECK(t.grad(va)[i] == 2.0);
  CHECK(!t.requires_grad(vb));
}

TEST_CASE("a variable used twice accumulates both gradient paths") {
  ad::Tape<double> t;
  const ad::Var x = t.parameter(Tensor<double>({3}, 2.0));
  const ad::Var y = ad::add(t, x, x);
  t.backward(ad::sum(t, y));
  for (std::size_t i = 0; i < 3; ++i) CHECK(t.grad(x)[i] == 2.0);
}

TEST_CASE("tape contracts") {
  ad::Tape<double> t;
  const ad::Var x = t.parameter(Tensor<double>({3}, 1.0));
  CHECK_THROWS_AS(t.backward(x), ContractError);
  CHECK_THROWS_AS(t.value(ad::Var{}), ContractError);
  CHECK_THROWS_AS(ad::add(t, x, t.constant(Tensor<double>({4}))), ShapeError);
  const ad::Var c = t.constant(Tensor<double>({3}, 1.0));
  const ad::Var s = ad::sum(t, c);
  t.backward(s);  // nothing requires grad: a no-op
  CHECK(t.grad(x) == Tensor<double>({3}));
}

TEST_CASE("the full gradient suite passes") {
  for (std::uint64_t seed : {1u, 2u}) {
    const auto cases = run_gradcheck_suite(seed);
    CHECK(cases.size() == 11);
    for (const auto& c : cases) {
      INFO(c.name, " ", c.report.max_rel_error());
      CHECK(c.report.pass());
    }
  }
}

TEST_CASE("relative error floor") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == 0.5);
  CHECK(relative_error(0.0, 1e-9, 1e-4) == doctest::Approx(1e-5));
}
