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

// Training losses: l = alpha * l_R + beta * l_P.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hrolf/autodiff.hpp"
#include "hrolf/lightfield.hpp"

namespace hrolf {

struct LossWeights {
  double alpha = 1.0;   // reconstruction
  double beta = 0.01;   // perceptual

  bool operator==(const LossWeights&) const = default;
};

// Throws ConfigError unless alpha, beta >= 0 and alpha + beta > 0.
void validate(const LossWeights& w);

// Fixed feature extractor phi: three stride-2 3x3 conv + LReLU(0.2) stages
// with 8, 16 and 32 channels. The angular kernel is 1x1, so every view is
// processed independently. Features are the last stage's output.
class FeatureNet {
 public:
  static constexpr std::size_t kStages = 3;
  static constexpr std::size_t kChannels[kStages] = {8, 16, 32};
  static constexpr double kSlope = 0.2;

  FeatureNet() = default;

  // Fan-in scaled normal weights and zero biases from per-stage streams.
  static FeatureNet seeded(std::size_t image_channels, std::uint64_t seed);

  // Weights named "phi.stage{k}.w" / "phi.stage{k}.b", k = 0..2. Throws
  // FormatError when a record is missing or has the wrong shape.
  static FeatureNet from_records(const std::map<std::string, Tensor<double>>& records,
                                 std::size_t image_channels);
  std::map<std::string, Tensor<double>> records() const;

  std::size_t image_channels() const { return image_channels_; }
  bool empty() const { return weights_.empty(); }

  template <typename Real>
  ad::Var apply(ad::Tape<Real>& tape, ad::Var x) const;

  // Convenience forward without gradients.
  template <typename Real>
  Tensor<Real> features(const Tensor<Real>& x) const;

  bool operator==(const FeatureNet&) const = default;

 private:
  std::size_t image_channels_ = 0;
  std::vector<Tensor<double>> weights_;
  std::vector<Tensor<double>> biases_;
};

// ---- Tape level ----------------------------------------------------------

// Sum (or mean) of squared differences over every element.
template <typename Real>
ad::Var reconstruction_loss(ad::Tape<Real>& tape, ad::Var pred, ad::Var target, ad::Reduction reduction);

// Mean over views of the per-view feature MSE. Every view yields the same
// number of feature elements, so this is the mean over all feature elements.
template <typename Real>
ad::Var perceptual_loss(ad::Tape<Real>& tape, ad::Var pred, ad::Var target, const FeatureNet& phi);

template <typename Real>
ad::Var total_loss(ad::Tape<Real>& tape, ad::Var lr, ad::Var lp, const LossWeights& w);

// ---- LightField level (double) -----------------------------------------

// Sum over (s, t, x, y, c) of squared differences, divided by the element
// count when normalize is set. Values are used on their own scale.
double reconstruction_loss(const LightField& pred, const LightField& target, bool normalize);

// Views are scaled by input_scale before entering phi.
double perceptual_loss(const LightField& pred, const LightField& target, const FeatureNet& phi,
                       double input_scale = 1.0 / 255.0);

double total_loss(double lr, double lp, const LossWeights& w);

}  // namespace hrolf
