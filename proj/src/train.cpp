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

#include "hrolf/train.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "hrolf/kv_text.hpp"
#include "hrolf/random.hpp"

namespace hrolf {

void validate(const TrainConfig& cfg) {
  auto fail = [](const std::string& what) { throw ConfigError("train config: " + what); };
  if (!(cfg.lr0 > 0) || !std::isfinite(cfg.lr0)) fail("lr0 must be positive");
  if (!(cfg.decay > 0 && cfg.decay <= 1)) fail("decay must lie in (0, 1]");
  if (cfg.decay_period == 0) fail("decay_period must be >= 1");
  if (cfg.patch == 0) fail("patch must be >= 1");
  if (cfg.batch == 0) fail("batch must be >= 1");
  if (cfg.steps_per_epoch == 0) fail("steps_per_epoch must be >= 1");
  if (!(cfg.momentum >= 0 && cfg.momentum < 1)) fail("momentum must lie in [0, 1)");
  if (!(cfg.clip_norm >= 0)) fail("clip_norm must be >= 0");
  if (cfg.blur_size % 2 == 0) fail("blur_size must be odd");
  if (!(cfg.blur_sigma > 0)) fail("blur_sigma must be positive");
  if (!(cfg.noise_std >= 0)) fail("noise_std must be >= 0");
  validate(cfg.weights);
}

std::string serialize(const TrainConfig& cfg) {
  KeyValueWriter w;
  w.put("lr0", cfg.lr0);
  w.put("decay", cfg.decay);
  w.put("decay_period", cfg.decay_period);
  w.put("patch", cfg.patch);
  w.put("batch", cfg.batch);
  w.put("epochs", cfg.epochs);
  w.put("steps_per_epoch", cfg.steps_per_epoch);
  w.put("max_steps", cfg.max_steps);
  w.put("alpha", cfg.weights.alpha);
  w.put("beta", cfg.weights.beta);
  w.put("seed", cfg.seed);
  w.put("deterministic", cfg.deterministic);
  w.put("momentum", cfg.momentum);
  w.put("clip_norm", cfg.clip_norm);
  w.put("recon_on_final", cfg.recon_on_final);
  w.put("normalize_recon", cfg.normalize_recon);
  w.put("blur_size", cfg.blur_size);
  w.put("blur_sigma", cfg.blur_sigma);
  w.put("noise_std", cfg.noise_std);
  w.put("feature_seed", cfg.feature_seed);
  return w.str();
}

TrainConfig parse_train_config(const std::string& text) {
  const KeyValueReader r(text, "train config");
  TrainConfig cfg;
  r.get("lr0", cfg.lr0);
  r.get("decay", cfg.decay);
  r.get("decay_period", cfg.decay_period);
  r.get("patch", cfg.patch);
  r.get("batch", cfg.batch);
  r.get("epochs", cfg.epochs);
  r.get("steps_per_epoch", cfg.steps_per_epoch);
  r.get("max_steps", cfg.max_steps);
  r.get("alpha", cfg.weights.alpha);
  r.get("beta", cfg.weights.beta);
  r.get("seed", cfg.seed);
  r.get("deterministic", cfg.deterministic);
  r.get("momentum", cfg.momentum);
  r.get("clip_norm", cfg.clip_norm);
  r.get("recon_on_final", cfg.recon_on_final);
  r.get("normalize_recon", cfg.normalize_recon);
  r.get("blur_size", cfg.blur_size);
  r.get("blur_sigma", cfg.blur_sigma);
  r.get("noise_std", cfg.noise_std);
  r.get("feature_seed", cfg.feature_seed);
  r.reject_unknown();
  return cfg;
}

std::size_t total_steps(const TrainConfig& cfg) {
  return cfg.max_steps != 0 ? cfg.max_steps : cfg.epochs * cfg.steps_per_epoch;
}

double lr_schedule(std::size_t epoch, const TrainConfig& cfg) {
  const auto k = static_cast<double>(epoch / cfg.decay_period);
  const double raw = cfg.lr0 * std::pow(cfg.decay, k);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", raw);
  return std::strtod(buf, nullptr);
}

template <typename Real>
void sgd_step(ModelParams<Real>& params, const std::map<std::string, Tensor<Real>>& grads, double lr,
              double momentum, SgdState<Real>& state) {
  std::size_t used = 0;
  for (auto& e : params.entries()) {
    if (!e.trainable) continue;
    const auto it = grads.find(e.name);
    if (it == grads.end()) throw ContractError("sgd_step: no gradient for parameter " + e.name);
    const Tensor<Real>& g = it->second;
    if (!g.same_shape(e.value)) throw ShapeError("sgd_step: gradient shape mismatch for " + e.name);
    ++used;
    const auto step = static_cast<Real>(lr);
    if (momentum == 0.0) {
      for (std::size_t i = 0; i < g.size(); ++i) e.value[i] -= step * g[i];
      continue;
    }
    const auto m = static_cast<Real>(momentum);
    auto [vit, inserted] = state.velocity.try_emplace(e.name, g.dims());
    Tensor<Real>& v = vit->second;
    for (std::size_t i = 0; i < g.size(); ++i) {
      v[i] = m * v[i] + g[i];
      e.value[i] -= step * (g[i] + m * v[i]);
    }
  }
  if (used != grads.size()) throw ContractError("sgd_step: gradients for unknown parameters");
}

template <typename Real>
double clip_grad_norm(std::map<std::string, Tensor<Real>>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) {
    for (Real v : g.values()) sq += static_cast<double>(v) * static_cast<double>(v);
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const auto k = static_cast<Real>(max_norm / norm);
    for (auto& [name, g] : grads) {
      for (Real& v : g.values()) v *= k;
    }
  }
  return norm;
}

std::string format_history_line(const HistoryRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu %zu %.9g %.9g %.9g %.9g", r.step, r.epoch, r.lr, r.loss_r, r.loss_p, r.loss);
  return buf;
}

std::string format_history(const std::vector<HistoryRecord>& history) {
  std::string out = "step epoch lr loss_r loss_p loss\n";
  for (const auto& r : history) out += format_history_line(r) + "\n";
  return out;
}

TrainState make_train_state(const ModelConfig& mcfg, const TrainConfig& tcfg) {
  validate(mcfg);
  validate(tcfg);
  TrainState state;
  state.params = init_params<float>(mcfg);
  state.phi = FeatureNet::seeded(mcfg.image_channels, tcfg.feature_seed);
  return state;
}

LightField make_low_res(const LightField& hr, const ModelConfig& mcfg, const DegradationConfig& dcfg) {
  const LightFieldShape sh = hr.shape();
  LightField angular = hr;
  if (sh.s != mcfg.in_s || sh.t != mcfg.in_t) {
    angular = decimate_angular(hr, {uniform_indices(sh.s, mcfg.in_s), uniform_indices(sh.t, mcfg.in_t)});
  }
  return degrade_spatial(angular, dcfg);
}

void validate_dataset(const std::vector<TrainSample>& data, const TrainConfig& cfg, const ModelConfig& mcfg) {
  if (data.empty()) throw ConfigError("training dataset is empty");
  if (cfg.patch % mcfg.scale != 0) {
    throw ConfigError("patch " + std::to_string(cfg.patch) + " is not divisible by scale " +
                      std::to_string(mcfg.scale));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const LightFieldShape sh = data[i].hr.shape();
    const std::string which = "sample " + std::to_string(i);
    if (sh.s != mcfg.out_s || sh.t != mcfg.out_t) {
      throw ConfigError(which + " has " + std::to_string(sh.s) + "x" + std::to_string(sh.t) +
                        " views, model targets " + std::to_string(mcfg.out_s) + "x" + std::to_string(mcfg.out_t));
    }
    if (sh.c != mcfg.image_channels) throw ConfigError(which + " channel count does not match the model");
    if (sh.x < cfg.patch || sh.y < cfg.patch) {
      throw ConfigError(which + " is smaller than the " + std::to_string(cfg.patch) + " pixel patch");
    }
    if (sh.x % mcfg.scale != 0 || sh.y % mcfg.scale != 0) {
      throw ConfigError(which + " spatial extent is not divisible by the scale");
    }
    if (data[i].lr) {
      const LightFieldShape lo = data[i].lr->shape();
      if (lo.s != mcfg.in_s || lo.t != mcfg.in_t || lo.x * mcfg.scale != sh.x || lo.y * mcfg.scale != sh.y ||
          lo.c != sh.c) {
        throw ConfigError(which + " low-resolution field " + to_string(lo) + " does not match " + to_string(sh));
      }
    }
  }
}

namespace {

struct LossGraph {
  ad::Var loss;
  ad::Var loss_r;
  ad::Var loss_p;
};

LossGraph build_loss(ad::Tape<float>& tape, const ForwardContext<float>& ctx, ad::Var input, ad::Var target,
                     const FeatureNet& phi, const TrainConfig& cfg) {
  const ModelVars mv = model_forward(ctx, input);
  const auto reduction = cfg.normalize_recon ? ad::Reduction::kMean : ad::Reduction::kSum;
  // Terms with zero weight are evaluated on detached copies.
  auto maybe_detach = [&tape](ad::Var v, double weight) { return weight > 0 ? v : tape.constant(tape.value(v)); };
  const double alpha = cfg.weights.alpha;
  ad::Var lr = reconstruction_loss(tape, maybe_detach(mv.primary, alpha), target, reduction);
  if (cfg.recon_on_final) {
    lr = ad::add(tape, lr, reconstruction_loss(tape, maybe_detach(mv.final_output, alpha), target, reduction));
  }
  const ad::Var lp = perceptual_loss(tape, maybe_detach(mv.final_output, cfg.weights.beta), target, phi);
  return {total_loss(tape, lr, lp, cfg.weights), lr, lp};
}

void update_running_stats(ModelParams<float>& params, const std::map<std::string, ops::AgbnStats>& batch) {
  const auto m = static_cast<float>(params.config().bn_momentum);
  for (const auto& [layer, stats] : batch) {
    Tensor<float>& mean = params.get(layer + ".running_mean");
    Tensor<float>& var = params.get(layer + ".running_var");
    for (std::size_t c = 0; c < mean.size(); ++c) {
      mean[c] = m * mean[c] + (1.0f - m) * static_cast<float>(stats.mean[c]);
      var[c] = m * var[c] + (1.0f - m) * static_cast<float>(stats.var[c]);
    }
  }
}

enum : std::uint64_t { kPatchStream = 1, kNoiseStream = 2 };

}  // namespace

std::vector<HistoryRecord> train_loop(const std::vector<TrainSample>& data, const TrainConfig& cfg,
                                      TrainState& state, const StepCallback& on_step) {
  validate(cfg);
  const ModelConfig& mcfg = state.params.config();
  validate(mcfg);
  validate_dataset(data, cfg, mcfg);
  if (state.phi.empty()) throw ContractError("train state has no feature net");

  std::vector<HistoryRecord> history;
  const std::size_t steps = total_steps(cfg);
  const std::size_t scale = mcfg.scale;
  const std::size_t lr_patch = cfg.patch / scale;
  for (std::size_t step = state.step; step < steps; ++step) {
    const std::size_t epoch = step / cfg.steps_per_epoch;
    const double lr = lr_schedule(epoch, cfg);

    Rng rng(derive_seed(cfg.seed, {kPatchStream, step}));
    std::vector<LightField> hr_patches;
    std::vector<LightField> lr_patches;
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const TrainSample& sample =
          data[std::uniform_int_distribution<std::size_t>(0, data.size() - 1)(rng)];
      const LightFieldShape sh = sample.hr.shape();
      const std::size_t x0 = scale * std::uniform_int_distribution<std::size_t>(0, (sh.x - cfg.patch) / scale)(rng);
      const std::size_t y0 = scale * std::uniform_int_distribution<std::size_t>(0, (sh.y - cfg.patch) / scale)(rng);
      LightField hr = crop_patch(sample.hr, x0, y0, cfg.patch, cfg.patch);
      if (sample.lr) {
        lr_patches.push_back(crop_patch(*sample.lr, x0 / scale, y0 / scale, lr_patch, lr_patch));
      } else {
        DegradationConfig dcfg{scale, cfg.blur_size, cfg.blur_sigma, cfg.noise_std,
                               derive_seed(cfg.seed, {kNoiseStream, step, b})};
        lr_patches.push_back(make_low_res(hr, mcfg, dcfg));
      }
      hr_patches.push_back(std::move(hr));
    }

    ad::Tape<float> tape;
    const BoundParams vars = bind_params(tape, state.params, true);
    std::map<std::string, ops::AgbnStats> batch_stats;
    const ForwardContext<float> ctx{tape, state.params, vars, ad::NormMode::kTrain, &batch_stats};
    const ad::Var input = tape.constant(stack_batch<float>(lr_patches));
    const ad::Var target = tape.constant(stack_batch<float>(hr_patches));
    const auto diverged = [&](const std::string& why) {
      return ComputeError("training diverged at step " + std::to_string(step) + " (epoch " + std::to_string(epoch) +
                          "): " + why);
    };
    std::optional<LossGraph> built;
    try {
      built = build_loss(tape, ctx, input, target, state.phi, cfg);
    } catch (const ComputeError& e) {
      throw diverged(e.what());
    }
    const LossGraph& g = *built;

    HistoryRecord rec{step, epoch, lr, tape.value(g.loss_r).item(), tape.value(g.loss_p).item(),
                      tape.value(g.loss).item()};
    if (!std::isfinite(rec.loss)) throw diverged("loss is " + std::to_string(rec.loss));
    try {
      tape.backward(g.loss);
    } catch (const ComputeError& e) {
      throw diverged(e.what());
    }
    std::map<std::string, Tensor<float>> grads;
    for (const auto& e : state.params.entries()) {
      if (e.trainable) grads[e.name] = tape.grad(vars.at(e.name));
    }
    if (cfg.clip_norm > 0) clip_grad_norm(grads, cfg.clip_norm);
    sgd_step(state.params, grads, lr, cfg.momentum, state.sgd);
    update_running_stats(state.params, batch_stats);
    state.step = step + 1;
    history.push_back(rec);
    if (on_step) on_step(rec, state);
  }
  return history;
}

LossBreakdown evaluate_losses(const ModelParams<float>& params, const FeatureNet& phi, const LightField& low_res,
                              const LightField& hr, const TrainConfig& cfg, ad::NormMode mode) {
  ad::Tape<float> tape;
  const BoundParams vars = bind_params(tape, params, false);
  const ForwardContext<float> ctx{tape, params, vars, mode, nullptr};
  const ad::Var input = tape.constant(to_tensor<float>(low_res));
  const ad::Var target = tape.constant(to_tensor<float>(hr));
  const LossGraph g = build_loss(tape, ctx, input, target, phi, cfg);
  return {tape.value(g.loss_r).item(), tape.value(g.loss_p).item(), tape.value(g.loss).item()};
}

template void sgd_step(ModelParams<float>&, const std::map<std::string, Tensor<float>>&, double, double,
                       SgdState<float>&);
template void sgd_step(ModelParams<double>&, const std::map<std::string, Tensor<double>>&, double, double,
                       SgdState<double>&);
template double clip_grad_norm(std::map<std::string, Tensor<float>>&, double);
template double clip_grad_norm(std::map<std::string, Tensor<double>>&, double);

}  // namespace hrolf
