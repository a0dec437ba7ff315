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

#include "hrolf/losses.hpp"

#include <cmath>

#include "hrolf/model.hpp"
#include "hrolf/random.hpp"

namespace hrolf {

void validate(const LossWeights& w) {
  if (!(w.alpha >= 0) || !(w.beta >= 0) || !std::isfinite(w.alpha) || !std::isfinite(w.beta)) {
    throw ConfigError("loss weights must be finite and non-negative");
  }
  if (!(w.alpha + w.beta > 0)) throw ConfigError("loss weights alpha + beta must be positive");
}

namespace {

KernelShape stage_kernel(std::size_t stage, std::size_t image_channels) {
  const std::size_t c_in = stage == 0 ? image_channels : FeatureNet::kChannels[stage - 1];
  return {3, 3, 1, 1, c_in, FeatureNet::kChannels[stage]};
}

std::string stage_name(std::size_t stage, const char* field) {
  return "phi.stage" + std::to_string(stage) + "." + field;
}

}  // namespace

FeatureNet FeatureNet::seeded(std::size_t image_channels, std::uint64_t seed) {
  if (image_channels != 1 && image_channels != 3) throw ConfigError("feature net needs 1 or 3 channels");
  FeatureNet net;
  net.image_channels_ = image_channels;
  for (std::size_t k = 0; k < kStages; ++k) {
    const KernelShape ks = stage_kernel(k, image_channels);
    Rng rng(derive_seed(seed, {0x7068, k}));
    const double var = 2.0 / ((1.0 + kSlope * kSlope) * static_cast<double>(ks.fan_in()));
    std::normal_distribution<double> normal(0.0, std::sqrt(var));
    Tensor<double> w(ks.weight_dims());
    // Rounded to float so checkpoints (f32 records) restore phi exactly.
    for (double& v : w.values()) v = static_cast<float>(normal(rng));
    net.weights_.push_back(std::move(w));
    net.biases_.emplace_back(std::vector<std::size_t>{ks.c_out});
  }
  return net;
}

FeatureNet FeatureNet::from_records(const std::map<std::string, Tensor<double>>& records,
                                    std::size_t image_channels) {
  FeatureNet net;
  net.image_channels_ = image_channels;
  for (std::size_t k = 0; k < kStages; ++k) {
    const KernelShape ks = stage_kernel(k, image_channels);
    const auto w = records.find(stage_name(k, "w"));
    const auto b = records.find(stage_name(k, "b"));
    if (w == records.end() || b == records.end()) {
      throw FormatError("feature net record " + stage_name(k, w == records.end() ? "w" : "b") + " is missing");
    }
    if (w->second.dims() != ks.weight_dims() || b->second.dims() != std::vector<std::size_t>{ks.c_out}) {
      throw FormatError("feature net stage " + std::to_string(k) + " has shape " +
                        dims_to_string(w->second.dims()) + ", expected " + dims_to_string(ks.weight_dims()));
    }
    net.weights_.push_back(w->second);
    net.biases_.push_back(b->second);
  }
  return net;
}

std::map<std::string, Tensor<double>> FeatureNet::records() const {
  std::map<std::string, Tensor<double>> out;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    out[stage_name(k, "w")] = weights_[k];
    out[stage_name(k, "b")] = biases_[k];
  }
  return out;
}

template <typename Real>
ad::Var FeatureNet::apply(ad::Tape<Real>& tape, ad::Var x) const {
  if (empty()) throw ContractError("feature net is not initialized");
  ad::Var h = x;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const ad::Var w = tape.constant(weights_[k].cast<Real>());
    const ad::Var b = tape.constant(biases_[k].cast<Real>());
    h = ad::hconv4d(tape, h, w, b, 2);
    h = ad::lrelu(tape, h, static_cast<Real>(kSlope));
  }
  return h;
}

template <typename Real>
Tensor<Real> FeatureNet::features(const Tensor<Real>& x) const {
  ad::Tape<Real> tape;
  return tape.value(apply(tape, tape.constant(x)));
}

template <typename Real>
ad::Var reconstruction_loss(ad::Tape<Real>& tape, ad::Var pred, ad::Var target, ad::Reduction reduction) {
  return ad::squared_error(tape, pred, target, reduction);
}

template <typename Real>
ad::Var perceptual_loss(ad::Tape<Real>& tape, ad::Var pred, ad::Var target, const FeatureNet& phi) {
  if (!tape.value(pred).same_shape(tape.value(target))) {
    throw ShapeError("perceptual_loss: shape mismatch " + dims_to_string(tape.value(pred).dims()) + " vs " +
                     dims_to_string(tape.value(target).dims()));
  }
  return ad::squared_error(tape, phi.apply(tape, pred), phi.apply(tape, target), ad::Reduction::kMean);
}

template <typename Real>
ad::Var total_loss(ad::Tape<Real>& tape, ad::Var lr, ad::Var lp, const LossWeights& w) {
  return ad::linear_combination(tape, lr, static_cast<Real>(w.alpha), lp, static_cast<Real>(w.beta));
}

double reconstruction_loss(const LightField& pred, const LightField& target, bool normalize) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("reconstruction_loss: shape mismatch " + to_string(pred.shape()) + " vs " +
                     to_string(target.shape()));
  }
  const auto a = pred.samples();
  const auto b = target.samples();
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += (a[i] - b[i]) * (a[i] - b[i]);
  return normalize && !a.empty() ? total / static_cast<double>(a.size()) : total;
}

double perceptual_loss(const LightField& pred, const LightField& target, const FeatureNet& phi,
                       double input_scale) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("perceptual_loss: shape mismatch " + to_string(pred.shape()) + " vs " +
                     to_string(target.shape()));
  }
  ad::Tape<double> tape;
  const ad::Var a = tape.constant(to_tensor<double>(pred, input_scale));
  const ad::Var b = tape.constant(to_tensor<double>(target, input_scale));
  return tape.value(perceptual_loss(tape, a, b, phi)).item();
}

double total_loss(double lr, double lp, const LossWeights& w) { return w.alpha * lr + w.beta * lp; }

#define HROLF_INSTANTIATE_LOSSES(Real)                                                   \
  template ad::Var FeatureNet::apply(ad::Tape<Real>&, ad::Var) const;                    \
  template Tensor<Real> FeatureNet::features(const Tensor<Real>&) const;                 \
  template ad::Var reconstruction_loss(ad::Tape<Real>&, ad::Var, ad::Var, ad::Reduction); \
  template ad::Var perceptual_loss(ad::Tape<Real>&, ad::Var, ad::Var, const FeatureNet&); \
  template ad::Var total_loss(ad::Tape<Real>&, ad::Var, ad::Var, const LossWeights&);

HROLF_INSTANTIATE_LOSSES(float)
HROLF_INSTANTIATE_LOSSES(double)

#undef HROLF_INSTANTIATE_LOSSES

}  // namespace hrolf
