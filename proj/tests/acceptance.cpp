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

// Acceptance runner: one PASS/FAIL line per criterion, then a summary.
// Exits 0 once every line is printed; --strict turns any FAIL into exit 1.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "hrolf/checkpoint.hpp"
#include "hrolf/degrade.hpp"
#include "hrolf/gradcheck_suite.hpp"
#include "hrolf/metrics.hpp"
#include "hrolf/ops.hpp"
#include "hrolf/resample.hpp"
#include "hrolf/synth.hpp"
#include "hrolf/train.hpp"
#include "oracles.hpp"

using namespace hrolf;
using namespace hrolf::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cases = run_gradcheck_suite(1);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = secs < 120.0;
  double worst = 0;
  std::string failed;
  for (const auto& c : cases) {
    worst = std::max(worst, c.report.max_rel_error());
    if (!c.report.pass()) {
      ok = false;
      failed += " " + c.name;
    }
  }
  return {ok, std::to_string(cases.size()) + " cases, max rel err " + fmt("%.2e", worst) +
                  (failed.empty() ? "" : ", failed:" + failed)};
}

Outcome oracle_equivalence() {
  Gen g(2024);
  double conv = 0, deg = 0, bn = 0;
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    const auto x = random_tensor(g, {uniform_size(g, 1, 2), uniform_size(g, 1, 4), uniform_size(g, 1, 4),
                                     uniform_size(g, 1, 7), uniform_size(g, 1, 7), uniform_size(g, 1, 4)});
    const std::size_t co = uniform_size(g, 1, 5);
    const auto w = random_tensor(g, {odd_size(g, 2), odd_size(g, 1), odd_size(g, 1), odd_size(g, 1), x.dim(5), co});
    const auto b = random_tensor(g, {co});
    const std::size_t stride = uniform_size(g, 1, 3);
    conv = std::max(conv, rel_diff(ops::conv4d_forward(x, w, b, stride), naive_conv4d(x, w, b, stride)));

    DegradationConfig c;
    c.scale = uniform_size(g, 1, 3);
    c.blur_size = odd_size(g, 3);
    c.sigma = uniform_real(g, 0.3, 2.0);
    c.noise_std = 0;
    const LightField hr = random_field(g, {uniform_size(g, 1, 3), uniform_size(g, 1, 3),
                                           c.scale * uniform_size(g, 1, 6), c.scale * uniform_size(g, 1, 6),
                                           channel_count(g)});
    deg = std::max(deg, rel_diff(degrade_spatial(hr, c), naive_degrade(hr, c.scale, c.blur_size, c.sigma)));

    const std::size_t ch = x.dim(5);
    const auto gamma = random_tensor(g, {ch}), beta = random_tensor(g, {ch});
    const auto st = ops::agbn_statistics(x);
    bn = std::max(bn, rel_diff(ops::agbn_apply(x, gamma, beta, st.mean, st.var, 1e-5), naive_agbn(x, gamma, beta, 1e-5)));
  }
  return {conv < 1e-12 && deg < 1e-12 && bn < 1e-12,
          std::to_string(n) + " instances each; conv " + fmt("%.1e", conv) + ", degrade " + fmt("%.1e", deg) +
              ", agbn " + fmt("%.1e", bn)};
}

Outcome upnet_contract() {
  Gen g(3);
  ModelConfig m;
  m.d = 1;
  m.n = 1;
  m.channels = 4;
  m.in_s = m.in_t = 3;
  m.out_s = m.out_t = 5;
  m.scale = 2;
  const auto p = init_params<double>(m);
  ad::Tape<double> t;
  const BoundParams vars = bind_params(t, p, false);
  const ForwardContext<double> ctx{t, p, vars, ad::NormMode::kEval, nullptr};
  const auto f = random_tensor(g, {1, 3, 3, 3, 3, 4});
  const auto up = t.value(upnet_forward(ctx, t.constant(f)));
  const auto expand = ops::conv4d_forward(f, p.get("up.expand.w"), p.get("up.expand.b"));
  const auto interp = ops::angular_interp_forward(expand, 5, 5);
  const auto shuffled = ops::pixel_shuffle(interp, 2);
  const bool shapes = up.dims() == std::vector<std::size_t>{1, 5, 5, 6, 6, 4} &&
                      expand.dims() == std::vector<std::size_t>{1, 3, 3, 3, 3, 16} &&
                      interp.dims() == std::vector<std::size_t>{1, 5, 5, 3, 3, 16};
  const SuperResolved sr = model_forward(LightField({3, 3, 3, 3, 1}, 100.0), init_params<float>(m));
  const bool model = sr.final_output.shape() == LightFieldShape{5, 5, 6, 6, 1} &&
                     sr.primary.shape() == LightFieldShape{5, 5, 6, 6, 1};
  return {shapes && model && shuffled == up, "3x3 views of 3x3 -> 5x5 views of 6x6, stages exact"};
}

Outcome agbn_statistics() {
  Gen g(4);
  double worst_mean = 0, worst_var = 0;
  bool constant_ok = true;
  for (int i = 0; i < 50; ++i) {
    const std::size_t c = uniform_size(g, 1, 6);
    const auto x = random_tensor(g, {uniform_size(g, 1, 3), uniform_size(g, 1, 4), uniform_size(g, 1, 4),
                                     uniform_size(g, 2, 8), uniform_size(g, 2, 8), c},
                                 -uniform_real(g, 0.5, 20), uniform_real(g, 0.5, 20));
    const auto st = ops::agbn_statistics(x);
    const auto y = ops::agbn_apply(x, Tensor<double>({c}, 1.0), Tensor<double>({c}), st.mean, st.var, 1e-5);
    const auto yt = ops::agbn_statistics(y);
    for (std::size_t k = 0; k < c; ++k) {
      worst_mean = std::max(worst_mean, std::abs(yt.mean[k]));
      worst_var = std::max(worst_var, std::abs(yt.var[k] - st.var[k] / (st.var[k] + 1e-5)));
    }
    const auto beta = random_tensor(g, {c});
    Tensor<double> flat(x.dims(), uniform_real(g, -5, 5));
    const auto sf = ops::agbn_statistics(flat);
    const auto z = ops::agbn_apply(flat, random_tensor(g, {c}), beta, sf.mean, sf.var, 1e-5);
    for (std::size_t j = 0; j < z.size(); ++j) constant_ok = constant_ok && z[j] == beta[j % c];
  }
  return {worst_mean < 1e-6 && worst_var < 1e-5 && constant_ok,
          "max |mean| " + fmt("%.1e", worst_mean) + ", max var err " + fmt("%.1e", worst_var) +
              (constant_ok ? ", constant -> beta exact" : ", constant input not exact")};
}

Outcome zero_disparity_round_trip() {
  const LightField gt = synth_scene(two_layer_config({9, 9, 64, 64, 1}, 0.0, 0.0), 5).field;
  const LightField low = decimate_angular(gt, angular_task(gt.shape(), "3x3"));
  const LightField back = angular_linear_interp(low, 9, 9);
  const EvalReport r = eval_lf(back, gt);
  return {r.mean_psnr == kPsnrIdentical && back == gt, "mean psnr " + fmt("%g", r.mean_psnr)};
}

struct OverfitRun {
  double final_psnr = 0;
  double primary_psnr = 0;
  double loss_p = 0;
};

OverfitRun overfit(const LightField& hr, const LightField& low, double beta) {
  ModelConfig m;
  m.d = 2;
  m.n = 1;
  m.channels = 8;
  m.in_s = m.in_t = m.out_s = m.out_t = 5;
  m.scale = 2;
  TrainConfig t;
  t.lr0 = 1e-4;
  t.decay = 0.1;
  t.decay_period = 10;
  t.steps_per_epoch = 200;
  t.max_steps = 2000;
  t.patch = 16;
  t.momentum = 0.9;
  t.clip_norm = 100;
  t.recon_on_final = true;
  t.normalize_recon = false;
  t.weights = {1.0, beta};
  TrainState st = make_train_state(m, t);
  train_loop({{hr, std::nullopt}}, t, st);
  const SuperResolved out = model_forward(low, st.params);
  TrainConfig probe = t;
  probe.weights = {1.0, 1.0};
  return {eval_lf(out.final_output, hr).mean_psnr, eval_lf(out.primary, hr).mean_psnr,
          evaluate_losses(st.params, st.phi, low, hr, probe, ad::NormMode::kEval).loss_p};
}

Outcome overfit_acceptance() {
  const LightField hr = synth_scene(two_layer_config({5, 5, 64, 64, 1}, 0.5, 1.5), 3).field;
  DegradationConfig d;
  d.noise_seed = 99;
  const LightField low = degrade_spatial(hr, d);
  const double bicubic = eval_lf(upsample_spatial(low, 2, SpatialMethod::kBicubic), hr).mean_psnr;
  const OverfitRun both = overfit(hr, low, 0.01);
  const OverfitRun primary_only = overfit(hr, low, 0.0);
  const bool sr = both.final_psnr >= bicubic + 1.0;
  const bool wiring = both.loss_p < primary_only.loss_p;
  return {sr && wiring, "bicubic " + fmt("%.3f", bicubic) + " dB, final " + fmt("%.3f", both.final_psnr) +
                            " dB (primary " + fmt("%.3f", both.primary_psnr) + "), l_P " + fmt("%.4g", both.loss_p) +
                            " vs beta=0 " + fmt("%.4g", primary_only.loss_p)};
}

ModelConfig small_model() {
  ModelConfig m;
  m.d = 2;
  m.n = 1;
  m.channels = 4;
  m.in_s = m.in_t = m.out_s = m.out_t = 3;
  m.seed = 11;
  return m;
}

TrainConfig small_train(std::size_t steps) {
  TrainConfig t;
  t.lr0 = 1e-3;
  t.momentum = 0.9;
  t.patch = 16;
  t.steps_per_epoch = 50;
  t.max_steps = steps;
  t.seed = 12;
  return t;
}

Outcome ablation_wiring() {
  const LightField hr = synth_scene(two_layer_config({3, 3, 32, 32, 1}, 0.5, 1.5), 7).field;
  const LightField low = degrade_spatial(hr, DegradationConfig{});
  const LossWeights joint{1.0, 0.01};
  const std::vector<LossWeights> arms = {{joint.alpha, 0.0}, {0.0, joint.beta}, joint};
  std::vector<ModelParams<float>> finals;
  std::vector<double> post;
  for (const auto& w : arms) {
    TrainConfig t = small_train(300);
    t.weights = w;
    TrainState st = make_train_state(small_model(), t);
    train_loop({{hr, low}}, t, st);
    TrainConfig probe = t;
    probe.weights = joint;
    post.push_back(evaluate_losses(st.params, st.phi, low, hr, probe, ad::NormMode::kEval).loss);
    finals.push_back(st.params);
  }
  const bool distinct = !(finals[0] == finals[1]) && !(finals[0] == finals[2]) && !(finals[1] == finals[2]);
  const bool direction = post[2] <= post[0] && post[2] <= post[1];
  return {distinct && direction, "joint loss post hoc: recon-only " + fmt("%.5g", post[0]) + ", perceptual-only " +
                                     fmt("%.5g", post[1]) + ", both " + fmt("%.5g", post[2])};
}

Outcome determinism() {
  const LightField hr = synth_scene(two_layer_config({3, 3, 32, 32, 1}, 0.5, 1.5), 7).field;
  const TrainConfig t = small_train(20);
  std::vector<std::vector<HistoryRecord>> hist;
  std::vector<std::vector<std::uint8_t>> bytes;
  for (int i = 0; i < 2; ++i) {
    TrainState st = make_train_state(small_model(), t);
    hist.push_back(train_loop({{hr, std::nullopt}}, t, st));
    bytes.push_back(encode_checkpoint(make_checkpoint(st, t)));
  }
  const bool round_trip = encode_checkpoint(decode_checkpoint(bytes[0], "memory")) == bytes[0];
  return {hist[0] == hist[1] && bytes[0] == bytes[1] && round_trip,
          std::to_string(hist[0].size()) + " steps, checkpoint " + std::to_string(bytes[0].size()) + " bytes"};
}

Outcome degradation_pipeline() {
  const auto k = gaussian_kernel(7, 1.2);
  double sum = 0;
  for (double v : k) sum += v;
  double direct_sum = 0;
  for (int y = -3; y <= 3; ++y)
    for (int x = -3; x <= 3; ++x) direct_sum += std::exp(-(x * x + y * y) / (2 * 1.2 * 1.2));
  const double center = 1.0 / direct_sum;
  DegradationConfig c;
  c.noise_std = 0;
  bool constant = true;
  const LightField low = degrade_spatial(LightField({3, 3, 16, 16, 1}, 42.0), c);
  for (double v : low.samples()) {
    constant = constant && std::abs(v - 42.0) < 1e-12 * 255;
  }
  return {std::abs(sum - 1.0) < 1e-12 && std::abs(k[24] - center) < 1e-12 && constant,
          "sum-1 " + fmt("%.1e", sum - 1.0) + ", center " + fmt("%.17g", k[24])};
}

Outcome lr_schedule_check() {
  const TrainConfig t;
  const double a = lr_schedule(0, t), b = lr_schedule(10, t), c = lr_schedule(25, t);
  return {a == 1e-5 && b == 1e-6 && c == 1e-7, fmt("%.17g", a) + " " + fmt("%.17g", b) + " " + fmt("%.17g", c)};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient suite", gradient_suite},
      {"oracle equivalence", oracle_equivalence},
      {"upnet shape contract", upnet_contract},
      {"agbn statistics", agbn_statistics},
      {"zero-disparity angular round trip", zero_disparity_round_trip},
      {"overfit vs bicubic and beta=0", overfit_acceptance},
      {"ablation wiring", ablation_wiring},
      {"determinism", determinism},
      {"degradation pipeline", degradation_pipeline},
      {"lr schedule", lr_schedule_check},
  };
  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    passed += o.pass;
    std::printf("criterion %zu: %s %s: %s [%.1fs]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("summary: %d/%zu passed\n", passed, criteria.size());
  return strict && passed != static_cast<int>(criteria.size()) ? 1 : 0;
}
