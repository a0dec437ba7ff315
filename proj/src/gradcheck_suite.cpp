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

#include "hrolf/gradcheck_suite.hpp"

#include <chrono>
#include <cstdio>
#include <random>

#include "hrolf/losses.hpp"
#include "hrolf/model.hpp"
#include "hrolf/random.hpp"

namespace hrolf {

namespace {

Tensor<double> random_tensor(Rng& rng, std::vector<std::size_t> dims, double scale = 1.0) {
  Tensor<double> t(std::move(dims));
  std::normal_distribution<double> normal(0.0, scale);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = normal(rng);
  return t;
}

// Values bounded away from zero so that central differences never straddle
// the LReLU kink.
Tensor<double> off_kink_tensor(Rng& rng, std::vector<std::size_t> dims) {
  Tensor<double> t(std::move(dims));
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = sign(rng) ? mag(rng) : -mag(rng);
  return t;
}

struct Runner {
  std::vector<GradCheckCase> cases;
  double tolerance;
  double step;

  void run(const std::string& name, const ScalarClosure& fn, const std::vector<GradCheckInput>& inputs) {
    const auto t0 = std::chrono::steady_clock::now();
    GradCheckCase c{name, grad_check(fn, inputs, tolerance, step, kGradCheckFloor), 0.0};
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    cases.push_back(std::move(c));
  }
};

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed, double tolerance, double step) {
  Rng rng(derive_seed(seed, {0x6763}));
  Runner r{{}, tolerance, step};
  const std::vector<std::size_t> fmap{2, 3, 2, 4, 3, 2};

  {
    const Tensor<double> probe = random_tensor(rng, {2, 3, 2, 4, 3, 3});
    r.run("hconv4d",
          [probe](ad::Tape<double>& t, std::span<const ad::Var> v) {
            return ad::dot(t, ad::hconv4d(t, v[0], v[1], v[2]), probe);
          },
          {{"input", random_tensor(rng, fmap)},
           {"weights", random_tensor(rng, {3, 3, 3, 1, 2, 3}, 0.3)},
           {"bias", random_tensor(rng, {3})}});
  }
  {
    const Tensor<double> probe = random_tensor(rng, {1, 2, 2, 3, 3, 3});
    r.run("hconv4d_stride2",
          [probe](ad::Tape<double>& t, std::span<const ad::Var> v) {
            return ad::dot(t, ad::hconv4d(t, v[0], v[1], v[2], 2), probe);
          },
          {{"input", random_tensor(rng, {1, 2, 2, 5, 6, 2})},
           {"weights", random_tensor(rng, {3, 3, 1, 1, 2, 3}, 0.3)},
           {"bias", random_tensor(rng, {3})}});
  }
  {
    const Tensor<double> probe = random_tensor(rng, fmap);
    r.run("lrelu",
          [probe](ad::Tape<double>& t, std::span<const ad::Var> v) {
            return ad::dot(t, ad::lrelu(t, v[0], 0.2), probe);
          },
          {{"x", off_kink_tensor(rng, fmap)}});
  }
  {
    const Tensor<double> probe = random_tensor(rng, fmap);
    r.run("agbn_train",
          [probe](ad::Tape<double>& t, std::span<const ad::Var> v) {
            ad::AgbnOptions o;
            o.mode = ad::NormMode::kTrain;
            return ad::dot(t, ad::agbn(t, v[0], v[1], v[2], o), probe);
          },
          {{"x", random_tensor(rng, fmap)}, {"gamma", random_tensor(rng, {2})}, {"beta", random_tensor(rng, {2})}});
  }
  {
    const Tensor<double> probe = random_tensor(rng, fmap);
    r.run("add",
          [probe](ad::Tape<double>& t, std::span<const ad::Var> v) { return ad::dot(t, ad::add(t, v[0], v[1]), probe); },
          {{"a", random_tensor(rng, fmap)}, {"b", random_tensor(rng, fmap)}});
  }
  {
    const Tensor<double> probe = random_tensor(rng, {1, 2, 2, 6, 4, 2});
    r.run("pixel_shuffle",
          [probe](ad::Tape<double>& t, std::span<const ad::Var> v) {
            return ad::dot(t, ad::pixel_shuffle(t, v[0], 2), probe);
          },
          {{"x", random_tensor(rng, {1, 2, 2, 3, 2, 8})}});
  }
  {
    const Tensor<double> probe = random_tensor(rng, {1, 5, 4, 3, 2, 2});
    r.run("angular_interp",
          [probe](ad::Tape<double>& t, std::span<const ad::Var> v) {
            return ad::dot(t, ad::angular_interp(t, v[0], 5, 4), probe);
          },
          {{"x", random_tensor(rng, {1, 3, 2, 3, 2, 2})}});
  }
  const std::vector<std::size_t> img{1, 2, 2, 8, 8, 1};
  {
    r.run("reconstruction_loss",
          [](ad::Tape<double>& t, std::span<const ad::Var> v) {
            return reconstruction_loss(t, v[0], v[1], ad::Reduction::kMean);
          },
          {{"pred", random_tensor(rng, img)}, {"target", random_tensor(rng, img)}});
  }
  {
    const FeatureNet phi = FeatureNet::seeded(1, seed);
    r.run("perceptual_loss",
          [phi](ad::Tape<double>& t, std::span<const ad::Var> v) { return perceptual_loss(t, v[0], v[1], phi); },
          {{"pred", random_tensor(rng, img)}, {"target", random_tensor(rng, img)}});
  }
  {
    const FeatureNet phi = FeatureNet::seeded(1, seed);
    const LossWeights w{1.0, 0.5};
    r.run("total_loss",
          [phi, w](ad::Tape<double>& t, std::span<const ad::Var> v) {
            const ad::Var lr = reconstruction_loss(t, v[0], v[1], ad::Reduction::kMean);
            const ad::Var lp = perceptual_loss(t, v[0], v[1], phi);
            return total_loss(t, lr, lp, w);
          },
          {{"pred", random_tensor(rng, img)}, {"target", random_tensor(rng, img)}});
  }
  {
    ModelConfig cfg;
    cfg.d = 1;
    cfg.n = 1;
    cfg.channels = 2;
    cfg.scale = 2;
    cfg.in_s = cfg.in_t = cfg.out_s = cfg.out_t = 2;
    cfg.seed = seed;
    const ModelParams<double> base = init_params<double>(cfg);
    std::vector<GradCheckInput> inputs{{"input", random_tensor(rng, {1, 2, 2, 4, 4, 1})}};
    std::vector<std::string> names;
    for (const auto& e : base.entries()) {
      if (!e.trainable) continue;
      names.push_back(e.name);
      inputs.push_back({e.name, e.value});
    }
    const Tensor<double> probe_p = random_tensor(rng, {1, 2, 2, 8, 8, 1});
    const Tensor<double> probe_f = random_tensor(rng, {1, 2, 2, 8, 8, 1});
    r.run("model_end_to_end",
          [base, names, probe_p, probe_f](ad::Tape<double>& t, std::span<const ad::Var> v) {
            BoundParams vars;
            for (std::size_t i = 0; i < names.size(); ++i) vars[names[i]] = v[i + 1];
            for (const auto& e : base.entries()) {
              if (!e.trainable) vars[e.name] = t.constant(e.value);
            }
            const ForwardContext<double> ctx{t, base, vars, ad::NormMode::kTrain, nullptr};
            const ModelVars out = model_forward(ctx, v[0]);
            return ad::add(t, ad::dot(t, out.primary, probe_p), ad::dot(t, out.final_output, probe_f));
          },
          inputs);
  }
  return r.cases;
}

std::string format_gradcheck_table(const std::vector<GradCheckCase>& cases) {
  std::string out = "case                  max_rel_error  result  seconds\n";
  char buf[160];
  for (const auto& c : cases) {
    std::snprintf(buf, sizeof buf, "%-21s %13.3e  %-6s  %7.2f\n", c.name.c_str(), c.report.max_rel_error(),
                  c.report.pass() ? "PASS" : "FAIL", c.seconds);
    out += buf;
  }
  return out;
}

}  // namespace hrolf
