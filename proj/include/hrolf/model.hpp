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

// High-order residual network for light-field super-resolution.
//
//   F0   = HConv(I_L)                                   shallow features
//   F_G  = AGBN(HConv(HRB_d o ... o HRB_1(F0))) + F0     GRLNet
//   F_up = shuffle_s(interp_a(HConv_expand(F_G)))        UpNet
//   F_R  = AGBN(HConv(HRB_n o ... o HRB_1(F_up))) + F_up SReNet
//   I_primary = HConv_p(F_up),  I_final = HConv_f(F_R)
//
// with HRB(x) = x + AGBN(HConv(LReLU(AGBN(HConv(x))))).
//
// Networks see samples scaled to [0, 1]; the LightField-level entry points
// divide by 255 on the way in and multiply by 255 on the way out.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hrolf/autodiff.hpp"
#include "hrolf/lightfield.hpp"

namespace hrolf {

struct ModelConfig {
  std::size_t d = 5;         // HRBs in GRLNet
  std::size_t n = 3;         // HRBs in SReNet, n <= d
  std::size_t channels = 32;
  std::size_t spatial_kernel = 3;
  std::size_t angular_kernel = 3;
  std::size_t scale = 2;     // spatial factor
  std::size_t in_s = 5;      // input angular extent
  std::size_t in_t = 5;
  std::size_t out_s = 5;     // target angular extent
  std::size_t out_t = 5;
  std::size_t image_channels = 1;
  double lrelu_slope = 0.2;
  double bn_eps = 1e-5;
  double bn_momentum = 0.9;  // running = momentum * running + (1 - momentum) * batch
  bool post_add_lrelu = false;
  std::uint64_t seed = 1;

  bool operator==(const ModelConfig&) const = default;
};

// Throws ConfigError naming the violated invariant.
void validate(const ModelConfig& cfg);

std::string serialize(const ModelConfig& cfg);
ModelConfig parse_model_config(const std::string& text);

// Number of learnable scalars, in closed form.
std::size_t parameter_count(const ModelConfig& cfg);

template <typename Real>
struct ParamEntry {
  std::string name;
  Tensor<Real> value;
  bool trainable = true;  // false for AGBN running statistics
};

// All parameters of a model, in a fixed construction order. Convolutions are
// stored as "<layer>.w" / "<layer>.b", AGBN layers as "<layer>.gamma" /
// "<layer>.beta" with buffers "<layer>.running_mean" / "<layer>.running_var".
template <typename Real>
class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(const ModelConfig& cfg) : config_(cfg) {}

  const ModelConfig& config() const { return config_; }
  const std::vector<ParamEntry<Real>>& entries() const { return entries_; }
  std::vector<ParamEntry<Real>>& entries() { return entries_; }

  void add(std::string name, Tensor<Real> value, bool trainable);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const Tensor<Real>& get(const std::string& name) const;
  Tensor<Real>& get(const std::string& name);

  std::size_t trainable_count() const;

  template <typename Other>
  ModelParams<Other> cast() const {
    ModelParams<Other> out(config_);
    for (const auto& e : entries_) out.add(e.name, e.value.template cast<Other>(), e.trainable);
    return out;
  }

  bool operator==(const ModelParams& other) const {
    if (!(config_ == other.config_) || entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& a = entries_[i];
      const auto& b = other.entries_[i];
      if (a.name != b.name || a.trainable != b.trainable || !(a.value == b.value)) return false;
    }
    return true;
  }

 private:
  ModelConfig config_;
  std::vector<ParamEntry<Real>> entries_;
  std::map<std::string, std::size_t> index_;
};

// Fan-in scaled normal init, variance 2 / ((1 + slope^2) fan_in), zero biases,
// gamma = 1, beta = 0, running mean 0 / variance 1. Every tensor draws from its
// own stream derived from (seed, name), so init is deterministic per seed.
template <typename Real>
ModelParams<Real> init_params(const ModelConfig& cfg);

// Layer names in forward order.
std::vector<std::string> hrb_prefixes(const std::string& chain, std::size_t count);

// ---- Tape-level forward --------------------------------------------------

using BoundParams = std::map<std::string, ad::Var>;

// Binds every trainable tensor as a tape parameter (or as a constant when
// trainable == false) and every buffer as a constant.
template <typename Real>
BoundParams bind_params(ad::Tape<Real>& tape, const ModelParams<Real>& params, bool trainable);

template <typename Real>
struct ForwardContext {
  ad::Tape<Real>& tape;
  const ModelParams<Real>& params;
  const BoundParams& vars;
  ad::NormMode mode = ad::NormMode::kTrain;
  // Receives train-mode batch statistics keyed by AGBN layer name.
  std::map<std::string, ops::AgbnStats>* batch_stats = nullptr;
};

template <typename Real>
ad::Var conv_layer(const ForwardContext<Real>& ctx, const std::string& layer, ad::Var x,
                   std::size_t stride = 1);
template <typename Real>
ad::Var agbn_layer(const ForwardContext<Real>& ctx, const std::string& layer, ad::Var x);

// x + AGBN(HConv2(LReLU(AGBN(HConv1(x))))), optionally followed by LReLU.
template <typename Real>
ad::Var hrb_forward(const ForwardContext<Real>& ctx, const std::string& prefix, ad::Var x);

// AGBN(HConv(HRB_k o ... o HRB_1(x))) + x for the blocks "<chain>.hrb{i}" and
// tail "<chain>.tail". Intermediate block outputs are appended to
// block_outputs when given. count may be zero.
template <typename Real>
ad::Var residual_chain(const ForwardContext<Real>& ctx, const std::string& chain, std::size_t count,
                       ad::Var x, std::vector<ad::Var>* block_outputs = nullptr);

template <typename Real>
ad::Var grlnet_forward(const ForwardContext<Real>& ctx, ad::Var f0,
                       std::vector<ad::Var>* block_outputs = nullptr);

// Channel expansion HConv (c -> c * scale^2), angular linear interpolation to
// (out_s, out_t), then spatial pixel shuffle by scale.
template <typename Real>
ad::Var upnet_forward(const ForwardContext<Real>& ctx, ad::Var f_g);

template <typename Real>
ad::Var srenet_forward(const ForwardContext<Real>& ctx, ad::Var f_up,
                       std::vector<ad::Var>* block_outputs = nullptr);

struct ModelVars {
  ad::Var f0;
  std::vector<ad::Var> grl_blocks;
  ad::Var f_g;
  ad::Var f_up;
  std::vector<ad::Var> sre_blocks;
  ad::Var f_r;
  ad::Var primary;
  ad::Var final_output;
};

// input: [N, in_s, in_t, X, Y, image_channels], samples in [0, 1].
template <typename Real>
ModelVars model_forward(const ForwardContext<Real>& ctx, ad::Var input);

// ---- LightField-level inference -----------------------------------------

template <typename Real>
Tensor<Real> to_tensor(const LightField& lf, double scale = 1.0 / 255.0);
// Batch element `batch` of a rank-6 tensor, multiplied by `scale`.
template <typename Real>
LightField to_lightfield(const Tensor<Real>& x, std::size_t batch = 0, double scale = 255.0);
// Stacks fields with identical shapes along the batch axis.
template <typename Real>
Tensor<Real> stack_batch(const std::vector<LightField>& fields, double scale = 1.0 / 255.0);

struct SuperResolved {
  LightField primary;
  LightField final_output;
};

// Eval-mode forward (running statistics). Throws ConfigError when the input
// angular extent or channel count does not match the model.
template <typename Real>
SuperResolved model_forward(const LightField& low_res, const ModelParams<Real>& params);

}  // namespace hrolf
