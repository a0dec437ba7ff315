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

// Forward and backward kernels of the differentiable operation set. These are
// pure functions over tensors; the tape in autodiff.hpp wires them together.
// Instantiated for float and double.

#pragma once

#include <vector>

#include "hrolf/tensor.hpp"

namespace hrolf::ops {

// 4D cross-correlation (no kernel flip) with zero "same" padding on all four
// axes:
//   out[n,s,t,x,y,o] = bias[o] + sum_{i,j,p,q,ci} w[i,j,p,q,ci,o] *
//       in[n, s+p-a1/2, t+q-a2/2, X+i-s1/2, Y+j-s2/2, ci]
// where X = x*stride, Y = y*stride. stride > 1 subsamples the spatial axes
// only; the output spatial extent is ceil(extent / stride).
template <typename Real>
Tensor<Real> conv4d_forward(const Tensor<Real>& input, const Tensor<Real>& weights,
                            const Tensor<Real>& bias, std::size_t stride = 1);

template <typename Real>
struct Conv4dGrads {
  Tensor<Real> input;
  Tensor<Real> weights;
  Tensor<Real> bias;
};

// need_input = false skips the input gradient (first layer of a network).
template <typename Real>
Conv4dGrads<Real> conv4d_backward(const Tensor<Real>& input, const Tensor<Real>& weights,
                                  const Tensor<Real>& grad_out, std::size_t stride = 1,
                                  bool need_input = true);

template <typename Real>
Tensor<Real> lrelu_forward(const Tensor<Real>& x, Real slope);
template <typename Real>
Tensor<Real> lrelu_backward(const Tensor<Real>& x, const Tensor<Real>& grad_out, Real slope);

// Aperture-group batch normalization. Statistics of channel c pool over every
// (n, s, t, x, y) jointly; the variance is the biased mean squared deviation
// and normalization divides by sqrt(var + eps).
struct AgbnStats {
  std::vector<double> mean;
  std::vector<double> var;
};

template <typename Real>
AgbnStats agbn_statistics(const Tensor<Real>& x);

template <typename Real>
Tensor<Real> agbn_apply(const Tensor<Real>& x, const Tensor<Real>& gamma, const Tensor<Real>& beta,
                        const std::vector<double>& mean, const std::vector<double>& var,
                        double eps);

template <typename Real>
struct AgbnGrads {
  Tensor<Real> x;
  Tensor<Real> gamma;
  Tensor<Real> beta;
};

// batch_statistics = true differentiates through the mean and variance
// (train mode); false treats them as constants (eval mode).
template <typename Real>
AgbnGrads<Real> agbn_backward(const Tensor<Real>& x, const Tensor<Real>& gamma,
                              const std::vector<double>& mean, const std::vector<double>& var,
                              double eps, const Tensor<Real>& grad_out, bool batch_statistics);

// out[n,s,t,r*x+i,r*y+j,c] = in[n,s,t,x,y,c*r*r + i*r + j]
template <typename Real>
Tensor<Real> pixel_shuffle(const Tensor<Real>& x, std::size_t r);
// Exact inverse permutation of pixel_shuffle (and its adjoint).
template <typename Real>
Tensor<Real> pixel_unshuffle(const Tensor<Real>& x, std::size_t r);

// Source coordinate of output index k when resampling n -> n_out views:
// k * (n - 1) / (n_out - 1), split into an integer base and a fraction.
struct InterpTap {
  std::size_t base = 0;
  double frac = 0.0;  // zero exactly when the coordinate is integral
};
std::vector<InterpTap> angular_taps(std::size_t n, std::size_t n_out);

// Separable linear resampling of the angular axes, s first then t. Views at
// integral source coordinates are copied exactly.
template <typename Real>
Tensor<Real> angular_interp_forward(const Tensor<Real>& x, std::size_t s_out, std::size_t t_out);
template <typename Real>
Tensor<Real> angular_interp_backward(const Tensor<Real>& grad_out, std::size_t s_in,
                                     std::size_t t_in);

void check_angular_interp_args(std::size_t s, std::size_t t, std::size_t s_out, std::size_t t_out);

}  // namespace hrolf::ops
