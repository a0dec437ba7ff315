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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hrolf {

// Extents of a 4D light field I(x, y, s, t) with C channels per sample.
// (s, t) index the angular plane, (x, y) the spatial plane; s pairs with x
// and t pairs with y when disparity shifts are applied.
struct LightFieldShape {
  std::size_t s = 0;
  std::size_t t = 0;
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t c = 0;

  std::size_t view_size() const { return x * y * c; }
  std::size_t size() const { return s * t * view_size(); }
  bool operator==(const LightFieldShape&) const = default;
};

std::string to_string(const LightFieldShape& shape);

// Throws ContractError unless S,T,X,Y >= 1 and C in {1, 3}.
void validate_shape(const LightFieldShape& shape);

// Center view convention: floor((n - 1) / 2).
constexpr std::size_t center_index(std::size_t n) { return n == 0 ? 0 : (n - 1) / 2; }

// A single 2D image, row-major (y, x, c). Used for views, EPIs and dumps.
struct Image {
  std::size_t width = 0;   // x extent
  std::size_t height = 0;  // y extent
  std::size_t channels = 1;
  std::vector<double> values;

  Image() = default;
  Image(std::size_t w, std::size_t h, std::size_t c, double fill = 0.0)
      : width(w), height(h), channels(c), values(w * h * c, fill) {}

  double& at(std::size_t x, std::size_t y, std::size_t ch = 0) {
    return values[(y * width + x) * channels + ch];
  }
  double at(std::size_t x, std::size_t y, std::size_t ch = 0) const {
    return values[(y * width + x) * channels + ch];
  }
};

// Dense light field on the [0, 255] pixel scale. Samples are stored in the
// lf4 payload order (s, t, y, x, c). A default-constructed field is empty
// (all extents zero) and is rejected by every consumer.
class LightField {
 public:
  LightField() = default;
  explicit LightField(const LightFieldShape& shape, double fill = 0.0);
  LightField(const LightFieldShape& shape, std::vector<double> samples);

  const LightFieldShape& shape() const { return shape_; }
  bool empty() const { return samples_.empty(); }

  std::size_t index(std::size_t s, std::size_t t, std::size_t x, std::size_t y,
                    std::size_t c = 0) const {
    return (((s * shape_.t + t) * shape_.y + y) * shape_.x + x) * shape_.c + c;
  }
  double at(std::size_t s, std::size_t t, std::size_t x, std::size_t y,
            std::size_t c = 0) const {
    return samples_[index(s, t, x, y, c)];
  }
  double& at(std::size_t s, std::size_t t, std::size_t x, std::size_t y,
             std::size_t c = 0) {
    return samples_[index(s, t, x, y, c)];
  }

  std::span<const double> samples() const { return samples_; }
  std::span<double> samples() { return samples_; }

  // One sub-aperture image; channels interleaved.
  Image view(std::size_t s, std::size_t t) const;
  void set_view(std::size_t s, std::size_t t, const Image& image);

  bool operator==(const LightField&) const = default;

 private:
  LightFieldShape shape_;
  std::vector<double> samples_;
};

enum class EpiOrientation {
  kHorizontal,  // x-s slice at fixed (y, t)
  kVertical,    // y-t slice at fixed (x, s)
};

// Epipolar plane image. Rows are the angular axis, columns the spatial axis.
struct Epi {
  EpiOrientation orientation = EpiOrientation::kHorizontal;
  std::size_t spatial = 0;
  std::size_t angular = 0;
  std::vector<double> values;

  double at(std::size_t spatial_index, std::size_t angular_index) const {
    return values[angular_index * spatial + spatial_index];
  }
  Image to_image() const;
};

// Horizontal: X x S slice lf(x, fixed_spatial=y, s, fixed_angular=t).
// Vertical:   Y x T slice lf(fixed_spatial=x, y, fixed_angular=s, t).
Epi extract_epi(const LightField& lf, EpiOrientation orientation,
                std::size_t fixed_spatial_index, std::size_t fixed_angular_index,
                std::size_t channel = 0);

// Crops every view identically; throws RangeError instead of clamping.
LightField crop_patch(const LightField& lf, std::size_t x0, std::size_t y0,
                      std::size_t w, std::size_t h);

// BT.601 luma of an RGB field; identity copy for single-channel fields.
LightField to_luma(const LightField& lf);

}  // namespace hrolf
