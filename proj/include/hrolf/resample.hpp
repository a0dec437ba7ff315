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

// Classical interpolation baselines.

#pragma once

#include <string>

#include "hrolf/lightfield.hpp"

namespace hrolf {

enum class SpatialMethod { kBicubic, kLinear };

SpatialMethod parse_spatial_method(const std::string& name);

// Keys cubic convolution kernel with a = -0.5.
double cubic_weight(double d);

// Upsamples every view by an integer factor. HR sample X reads LR coordinate
// X / scale, matching the top-left decimation anchor; borders clamp.
Image upsample_image(const Image& image, std::size_t scale, SpatialMethod method);
LightField upsample_spatial(const LightField& lf, std::size_t scale, SpatialMethod method);

// Linear interpolation of the angular axes to (s_out, t_out), s first then t.
// Views at integral source positions are copied bit-exactly.
LightField angular_linear_interp(const LightField& lf, std::size_t s_out, std::size_t t_out);

}  // namespace hrolf
