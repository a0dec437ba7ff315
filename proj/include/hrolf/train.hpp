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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hrolf/degrade.hpp"
#include "hrolf/losses.hpp"
#include "hrolf/model.hpp"

namespace hrolf {

struct TrainConfig {
  double lr0 = 1e-5;
  double decay = 0.1;
  std::size_t decay_period = 10;  // epochs
  std::size_t patch = 32;         // HR patch edge
  std::size_t batch = 1;
  std::size_t epochs = 1;
  std::size_t steps_per_epoch = 100;
  std::size_t max_steps = 0;      // 0: epochs * steps_per_epoch
  LossWeights weights;
  std::uint64_t seed = 1;
  bool deterministic = true;
  double momentum = 0.0;
  double clip_norm = 0.0;         // 0 disables clipping
  bool recon_on_final = false;    // also apply l_R to the final output
  bool normalize_recon = true;    // mean instead of sum for l_R
  std::size_t blur_size = 7;
  double blur_sigma = 1.2;
  double noise_std = 1.0;
  std::uint64_t feature_seed = 7;

  bool operator==(const TrainConfig&) const = default;
};

void validate(const TrainConfig& cfg);
std::string serialize(const TrainConfig& cfg);
TrainConfig parse_train_config(const std::string& text);

std::size_t total_steps(const TrainConfig& cfg);

// lr0 * decay^floor(epoch / decay_period), rounded to 15 significant digits
// so that decimal schedules hit their literals (1e-5 -> 1e-6 -> 1e-7).
double lr_schedule(std::size_t epoch, const TrainConfig& cfg);

template <typename Real>
struct SgdState {
  std::map<std::string, Tensor<Real>> velocity;
};

// Plain SGD, p -= lr * g, when momentum == 0. Otherwise
//   v = momentum * v + g;  p -= lr * (g + momentum * v).
// grads must hold exactly one entry per trainable parameter.
template <typename Real>
void sgd_step(ModelParams<Real>& params, const std::map<std::string, Tensor<Real>>& grads, double lr,
              double momentum, SgdState<Real>& state);

// Scales grads in place so their global L2 norm is at most max_norm. Returns
// the norm before clipping.
template <typename Real>
double clip_grad_norm(std::map<std::string, Tensor<Real>>& grads, double max_norm);

struct TrainSample {
  LightField hr;                  // target, out_s x out_t views
  std::optional<LightField> lr;   // degraded on the fly when empty
};

struct HistoryRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double lr = 0.0;
  double loss_r = 0.0;
  double loss_p = 0.0;
  double loss = 0.0;

  bool operator==(const HistoryRecord&) const = default;
};

std::string format_history_line(const HistoryRecord& r);
std::string format_history(const std::vector<HistoryRecord>& history);

struct TrainState {
  ModelParams<float> params;
  SgdState<float> sgd;
  FeatureNet phi;
  std::size_t step = 0;  // steps completed
};

TrainState make_train_state(const ModelConfig& mcfg, const TrainConfig& tcfg);

using StepCallback = std::function<void(const HistoryRecord&, const TrainState&)>;

// Runs steps state.step .. total_steps(cfg) - 1. Each step draws its patches
// and noise from streams derived from (seed, step), so a resumed run repeats
// the unbroken run exactly. Throws ComputeError naming the step when the loss
// becomes non-finite.
std::vector<HistoryRecord> train_loop(const std::vector<TrainSample>& data, const TrainConfig& cfg,
                                      TrainState& state, const StepCallback& on_step = {});

// Checks dataset shapes against the model before any compute.
void validate_dataset(const std::vector<TrainSample>& data, const TrainConfig& cfg, const ModelConfig& mcfg);

// Builds the low-resolution input for an HR field: angular decimation to the
// model's input extent, then spatial degradation.
LightField make_low_res(const LightField& hr, const ModelConfig& mcfg, const DegradationConfig& dcfg);

struct LossBreakdown {
  double loss_r = 0.0;
  double loss_p = 0.0;
  double loss = 0.0;
};

// Training-scale losses of the model on one full (LR, HR) pair, without
// updating anything.
LossBreakdown evaluate_losses(const ModelParams<float>& params, const FeatureNet& phi, const LightField& low_res,
                              const LightField& hr, const TrainConfig& cfg, ad::NormMode mode);

}  // namespace hrolf
