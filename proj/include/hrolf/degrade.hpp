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

// Spatial degradation I_L = decimate(G * I_H) + noise, and angular
// decimation for view-synthesis tasks.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hrolf/lightfield.hpp"

namespace hrolf {

struct DegradationConfig {
  std::size_t scale = 2;
  std::size_t blur_size = 7;
  double sigma = 1.2;
  double noise_std = 1.0;  // on the [0, 255] scale
  std::uint64_t noise_seed = 0;
};

// Throws ConfigError unless scale >= 1, sigma > 0, blur_size odd and
// noise_std >= 0.
void validate(const DegradationConfig& cfg);

// Row-major size x size kernel, exp(-(i^2 + j^2) / (2 sigma^2)) on centered
// offsets, normalized to sum 1.
std::vector<double> gaussian_kernel(std::size_t size, double sigma);

// Reflect-101 index: ..., 2, 1, [0, 1, ..., n-1], n-2, ...
std::size_t reflect_index(std::int64_t i, std::size_t n);

// 2D correlation of one view with a size x size kernel, reflect padding.
Image blur_image(const Image& image, const std::vector<double>& kernel, std::size_t size);

// Per view: blur, keep samples at (scale * k) (top-left anchor), then add
// zero-mean Gaussian noise. View (s, t) draws from its own stream derived
// from noise_seed. Throws ConfigError when X or Y is not divisible by scale.
LightField degrade_spatial(const LightField& hr, const DegradationConfig& cfg);

// Endpoint-inclusive uniform selection of k out of n indices,
// round(i (n - 1) / (k - 1)). k = 1 keeps the center view.
std::vector<std::size_t> uniform_indices(std::size_t n, std::size_t k);

struct AngularSelection {
  std::vector<std::size_t> s;
  std::vector<std::size_t> t;
};

// "2x2", "3x3", ... -> uniform grid on the field's angular extent.
AngularSelection angular_task(const LightFieldShape& shape, const std::string& spec);

// Keeps views (s[i], t[j]). Throws RangeError on out-of-range or repeated
// indices.
LightField decimate_angular(const LightField& lf, const AngularSelection& selection);

// Places the selected views back at their source positions inside a
// zero-filled field of the given shape.
LightField embed_angular(const LightField& low, const AngularSelection& selection,
                         const LightFieldShape& full_shape);

}  // namespace hrolf
