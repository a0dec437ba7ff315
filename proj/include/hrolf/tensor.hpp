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

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hrolf/errors.hpp"

namespace hrolf {

// Layout of a feature map: batch, angular (s, t), spatial (x, y), channel.
// Channel is the fastest-varying axis.
struct FeatureShape {
  std::size_t n = 1;
  std::size_t s = 1;
  std::size_t t = 1;
  std::size_t x = 1;
  std::size_t y = 1;
  std::size_t c = 1;

  std::size_t size() const { return n * s * t * x * y * c; }
  std::size_t index(std::size_t in, std::size_t is, std::size_t it, std::size_t ix,
                    std::size_t iy, std::size_t ic) const {
    return ((((in * s + is) * t + it) * x + ix) * y + iy) * c + ic;
  }
  std::vector<std::size_t> dims() const { return {n, s, t, x, y, c}; }
  bool operator==(const FeatureShape&) const = default;
};

std::string to_string(const FeatureShape& shape);
std::string dims_to_string(const std::vector<std::size_t>& dims);

// Dense row-major array of arbitrary rank. Feature maps are rank 6 in
// FeatureShape order, HConv weights rank 6 (s1, s2, a1, a2, c_in, c_out),
// biases and normalization parameters rank 1, loss values rank 0.
template <typename Real>
class Tensor {
 public:
  using value_type = Real;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, Real fill = Real(0))
      : dims_(std::move(dims)), data_(product(dims_), fill) {}
  Tensor(std::vector<std::size_t> dims, std::vector<Real> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    if (data_.size() != product(dims_)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match dims " + dims_to_string(dims_));
    }
  }
  // A template so that braced dims lists never bind to FeatureShape.
  template <std::same_as<FeatureShape> Shape>
  explicit Tensor(const Shape& shape, Real fill = Real(0)) : Tensor(shape.dims(), fill) {}

  static Tensor scalar(Real v) { return Tensor(std::vector<std::size_t>{}, std::vector<Real>{v}); }

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }
  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }

  Real item() const {
    if (data_.size() != 1) throw ContractError("item() on a tensor with " + std::to_string(size()) + " elements");
    return data_[0];
  }

  FeatureShape feature_shape() const {
    if (dims_.size() != 6) throw ShapeError("expected a rank-6 feature map, got dims " + dims_to_string(dims_));
    return {dims_[0], dims_[1], dims_[2], dims_[3], dims_[4], dims_[5]};
  }

  bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }
  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](Real v) { return std::isfinite(v); });
  }

  template <typename Other>
  Tensor<Other> cast() const {
    std::vector<Other> out(data_.begin(), data_.end());
    return Tensor<Other>(dims_, std::move(out));
  }

  bool operator==(const Tensor&) const = default;

 private:
  static std::size_t product(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  }

  std::vector<std::size_t> dims_;
  std::vector<Real> data_;
};

// Extents of an HConv kernel. Every window extent must be odd so that "same"
// padding is symmetric.
struct KernelShape {
  std::size_t s1 = 3;  // spatial, along x
  std::size_t s2 = 3;  // spatial, along y
  std::size_t a1 = 3;  // angular, along s
  std::size_t a2 = 3;  // angular, along t
  std::size_t c_in = 1;
  std::size_t c_out = 1;

  std::size_t taps() const { return s1 * s2 * a1 * a2; }
  std::size_t fan_in() const { return taps() * c_in; }
  std::vector<std::size_t> weight_dims() const { return {s1, s2, a1, a2, c_in, c_out}; }
  bool operator==(const KernelShape&) const = default;
};

void validate(const KernelShape& shape);
KernelShape kernel_shape_of(const std::vector<std::size_t>& weight_dims);

// HConv weights and bias.
template <typename Real>
struct Kernel4D {
  Tensor<Real> weights;
  Tensor<Real> bias;

  Kernel4D() = default;
  explicit Kernel4D(const KernelShape& shape)
      : weights(shape.weight_dims()), bias(std::vector<std::size_t>{shape.c_out}) {
    validate(shape);
  }
  KernelShape shape() const { return kernel_shape_of(weights.dims()); }

  Real& at(std::size_t i, std::size_t j, std::size_t p, std::size_t q, std::size_t ci,
           std::size_t co) {
    const auto& d = weights.dims();
    return weights[(((((i * d[1] + j) * d[2] + p) * d[3] + q) * d[4] + ci) * d[5]) + co];
  }
};

}  // namespace hrolf
