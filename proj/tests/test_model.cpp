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

#include <cmath>

#include "hrolf/errors.hpp"
#include "hrolf/model.hpp"
#include "hrolf/ops.hpp"
#include "oracles.hpp"

using namespace hrolf;
using namespace hrolf::testing;

namespace {

ModelConfig tiny() {
  ModelConfig cfg;
  cfg.d = 1;
  cfg.n = 1;
  cfg.channels = 2;
  cfg.scale = 2;
  cfg.in_s = cfg.in_t = cfg.out_s = cfg.out_t = 2;
  return cfg;
}

// Independent count: HConv layers carry taps * c_in * c_out + c_out scalars,
// AGBN layers 2c.
std::size_t counted(const ModelConfig& m) {
  const std::size_t taps = m.spatial_kernel * m.spatial_kernel * m.angular_kernel * m.angular_kernel;
  const std::size_t c = m.channels, C = m.image_channels, g2 = m.scale * m.scale;
  auto conv = [&](std::size_t ci, std::size_t co) { return taps * ci * co + co; };
  const std::size_t hrb = 2 * conv(c, c) + 2 * 2 * c;
  const std::size_t tail = conv(c, c) + 2 * c;
  return conv(C, c) + m.d * hrb + tail + conv(c, c * g2) + conv(c, C) + m.n * hrb + tail + conv(c, C);
}

}  // namespace

TEST_CASE("parameter count of the tiny model") {
  CHECK(parameter_count(tiny()) == 3774);
  const auto p = init_params<double>(tiny());
  std::size_t n = 0;
  for (const auto& e : p.entries())
    if (e.trainable) n += e.value.size();
  CHECK(n == 3774);
}

TEST_CASE("parameter count closed form over random configs") {
  Gen g(1);
  for (int i = 0; i < 50; ++i) {
    ModelConfig m;
    m.d = uniform_size(g, 0, 6);
    m.n = uniform_size(g, 0, m.d);
    m.channels = uniform_size(g, 1, 40);
    m.image_channels = uniform_size(g, 1, 3);
    m.scale = uniform_size(g, 1, 4);
    m.spatial_kernel = odd_size(g, 2);
    m.angular_kernel = odd_size(g, 1);
    CHECK(parameter_count(m) == counted(m));
  }
}

TEST_CASE("config validation rejects invariant violations") {
  ModelConfig m = tiny();
  m.n = 2;
  CHECK_THROWS_AS(validate(m), ConfigError);
  m = tiny();
  m.channels = 0;
  CHECK_THROWS_AS(validate(m), ConfigError);
  m = tiny();
  m.spatial_kernel = 4;
  CHECK_THROWS_AS(validate(m), ConfigError);
  m = tiny();
  m.scale = 0;
  CHECK_THROWS_AS(validate(m), ConfigError);
  m = tiny();
  m.out_s = 1;
  CHECK_THROWS_AS(validate(m), ConfigError);
  CHECK_NOTHROW(validate(tiny()));
}

TEST_CASE("model config serialization round trip") {
  ModelConfig m = tiny();
  m.lrelu_slope = 0.125;
  m.seed = 99;
  m.post_add_lrelu = true;
  CHECK(parse_model_config(serialize(m)) == m);
  CHECK_THROWS_AS(parse_model_config("d=1\nbogus=2\n"), FormatError);
  CHECK_THROWS_AS(parse_model_config("d=x\n"), FormatError);
}

TEST_CASE("init is deterministic and fan-in scaled") {
  ModelConfig m;
  m.d = 1;
  m.n = 1;
  m.channels = 64;
  m.seed = 5;
  const auto p = init_params<float>(m);
  CHECK(p == init_params<float>(m));
  m.seed = 6;
  CHECK_FALSE(p == init_params<float>(m));
  const Tensor<float>& w = p.get("grl.hrb1.conv1.w");
  double mean = 0, sq = 0;
  for (std::size_t i = 0; i < w.size(); ++i) mean += w[i];
  mean /= static_cast<double>(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) sq += (w[i] - mean) * (w[i] - mean);
  const double var = sq / static_cast<double>(w.size());
  const double target = 2.0 / (81.0 * 64.0);
  CHECK(std::abs(var - target) < 0.2 * target);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(p.get("grl.hrb1.bn1.gamma")[i] == 1.0f);
    CHECK(p.get("grl.hrb1.bn1.running_var")[i] == 1.0f);
    CHECK(p.get("grl.hrb1.conv1.b")[i] == 0.0f);
  }
  CHECK_FALSE(p.entries()[0].name.empty());
  CHECK(hrb_prefixes("grl", 2) == std::vector<std::string>{"grl.hrb1", "grl.hrb2"});
}

TEST_CASE("forward shapes follow the config") {
  Gen g(2);
  ModelConfig m = tiny();
  m.in_s = m.in_t = 2;
  m.out_s = m.out_t = 8;
  m.image_channels = 3;
  const auto p = init_params<double>(m);
  ad::Tape<double> t;
  const BoundParams vars = bind_params(t, p, true);
  const ForwardContext<double> ctx{t, p, vars, ad::NormMode::kTrain, nullptr};
  const ModelVars out = model_forward(ctx, t.constant(random_tensor(g, {2, 2, 2, 5, 3, 3})));
  const std::vector<std::size_t> want{2, 8, 8, 10, 6, 3};
  CHECK(t.value(out.primary).dims() == want);
  CHECK(t.value(out.final_output).dims() == want);
  CHECK(t.value(out.f_up).dims() == std::vector<std::size_t>{2, 8, 8, 10, 6, 2});
  CHECK_THROWS_AS(model_forward(ctx, t.constant(random_tensor(g, {1, 3, 2, 5, 3, 3}))), ConfigError);
}

TEST_CASE("UpNet is expand conv, angular interpolation, then shuffle") {
  Gen g(3);
  ModelConfig m = tiny();
  m.in_s = m.in_t = 3;
  m.out_s = m.out_t = 5;
  m.channels = 4;
  const auto p = init_params<double>(m);
  ad::Tape<double> t;
  const BoundParams vars = bind_params(t, p, false);
  const ForwardContext<double> ctx{t, p, vars, ad::NormMode::kEval, nullptr};
  const auto f = random_tensor(g, {1, 3, 3, 3, 3, 4});
  const auto up = t.value(upnet_forward(ctx, t.constant(f)));
  CHECK(up.dims() == std::vector<std::size_t>{1, 5, 5, 6, 6, 4});
  const auto e = ops::conv4d_forward(f, p.get("up.expand.w"), p.get("up.expand.b"));
  CHECK(e.dims() == std::vector<std::size_t>{1, 3, 3, 3, 3, 16});
  const auto a = ops::angular_interp_forward(e, 5, 5);
  CHECK(ops::pixel_shuffle(a, 2) == up);
}

TEST_CASE("zeroing every AGBN affine makes GRLNet and SReNet the identity") {
  Gen g(4);
  ModelConfig m = tiny();
  m.d = 3;
  m.n = 2;
  auto p = init_params<double>(m);
  for (auto& e : p.entries()) {
    if (e.name.ends_with(".gamma") || e.name.ends_with(".beta")) e.value.fill(0.0);
  }
  ad::Tape<double> t;
  const BoundParams vars = bind_params(t, p, true);
  const ForwardContext<double> ctx{t, p, vars, ad::NormMode::kTrain, nullptr};
  const auto f = random_tensor(g, {1, 2, 2, 4, 4, 2});
  const ad::Var x = t.parameter(f);
  CHECK(t.value(grlnet_forward(ctx, x)) == f);
  const ad::Var y = srenet_forward(ctx, x);
  CHECK(t.value(y) == f);
  t.backward(ad::sum(t, y));
  const Tensor<double> gx = t.grad(x);
  for (std::size_t i = 0; i < gx.size(); ++i) CHECK(gx[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("eval-mode LightField inference") {
  Gen g(5);
  const ModelConfig m = tiny();
  const auto p = init_params<float>(m);
  const LightField low = random_field(g, {2, 2, 4, 4, 1});
  const SuperResolved a = model_forward<float>(low, p);
  const SuperResolved b = model_forward<float>(low, p);
  CHECK(a.final_output == b.final_output);
  CHECK(a.primary.shape() == LightFieldShape{2, 2, 8, 8, 1});
  CHECK(a.final_output.shape() == LightFieldShape{2, 2, 8, 8, 1});
  CHECK_THROWS_AS(model_forward<float>(random_field(g, {3, 2, 4, 4, 1}), p), ConfigError);
  CHECK_THROWS_AS(model_forward<float>(random_field(g, {2, 2, 4, 4, 3}), p), ConfigError);
}

TEST_CASE("tensor conversion scales to [0, 1] and back") {
  Gen g(6);
  const LightField lf = random_field(g, {2, 3, 4, 5, 3});
  const Tensor<double> x = to_tensor<double>(lf);
  CHECK(x.dims() == std::vector<std::size_t>{1, 2, 3, 4, 5, 3});
  CHECK(x[0] == doctest::Approx(lf.at(0, 0, 0, 0, 0) / 255.0));
  const LightField back = to_lightfield(x);
  CHECK(rel_diff(back, lf) < 1e-15);
  const Tensor<double> two = stack_batch<double>({lf, lf});
  CHECK(two.dim(0) == 2);
}
