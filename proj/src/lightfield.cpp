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

#include "hrolf/lightfield.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hrolf/errors.hpp"

namespace hrolf {

std::string to_string(const LightFieldShape& shape) {
  std::ostringstream os;
  os << shape.s << "x" << shape.t << " views of " << shape.x << "x" << shape.y
     << "x" << shape.c;
  return os.str();
}

void validate_shape(const LightFieldShape& shape) {
  if (shape.s == 0 || shape.t == 0 || shape.x == 0 || shape.y == 0) {
    throw ContractError("light field invariant violated: all extents must be >= 1, got " +
                        to_string(shape));
  }
  if (shape.c != 1 && shape.c != 3) {
    throw ContractError("light field invariant violated: channel count must be 1 or 3, got " +
                        std::to_string(shape.c));
  }
}

LightField::LightField(const LightFieldShape& shape, double fill)
    : shape_(shape) {
  validate_shape(shape);
  samples_.assign(shape.size(), fill);
}

LightField::LightField(const LightFieldShape& shape, std::vector<double> samples)
    : shape_(shape), samples_(std::move(samples)) {
  validate_shape(shape);
  if (samples_.size() != shape.size()) {
    throw ShapeError("light field sample count " + std::to_string(samples_.size()) +
                     " does not match " + to_string(shape));
  }
  for (double v : samples_) {
    if (!std::isfinite(v)) throw ContractError("light field samples must be finite");
  }
}

Image LightField::view(std::size_t s, std::size_t t) const {
  if (s >= shape_.s || t >= shape_.t) throw RangeError("view index out of range");
  Image image(shape_.x, shape_.y, shape_.c);
  const std::size_t offset = index(s, t, 0, 0, 0);
  std::copy_n(samples_.begin() + static_cast<std::ptrdiff_t>(offset), shape_.view_size(),
              image.values.begin());
  return image;
}

void LightField::set_view(std::size_t s, std::size_t t, const Image& image) {
  if (s >= shape_.s || t >= shape_.t) throw RangeError("view index out of range");
  if (image.width != shape_.x || image.height != shape_.y || image.channels != shape_.c) {
    throw ShapeError("view image shape does not match light field");
  }
  std::copy(image.values.begin(), image.values.end(),
            samples_.begin() + static_cast<std::ptrdiff_t>(index(s, t, 0, 0, 0)));
}

Image Epi::to_image() const {
  Image image(spatial, angular, 1);
  image.values = values;
  return image;
}

Epi extract_epi(const LightField& lf, EpiOrientation orientation,
                std::size_t fixed_spatial_index, std::size_t fixed_angular_index,
                std::size_t channel) {
  const auto& sh = lf.shape();
  if (lf.empty()) throw ContractError("extract_epi on empty light field");
  if (channel >= sh.c) throw RangeError("EPI channel out of range");
  Epi epi;
  epi.orientation = orientation;
  if (orientation == EpiOrientation::kHorizontal) {
    if (fixed_spatial_index >= sh.y || fixed_angular_index >= sh.t) {
      throw RangeError("horizontal EPI needs y < " + std::to_string(sh.y) + " and t < " +
                       std::to_string(sh.t));
    }
    epi.spatial = sh.x;
    epi.angular = sh.s;
    epi.values.resize(sh.x * sh.s);
    for (std::size_t s = 0; s < sh.s; ++s) {
      for (std::size_t x = 0; x < sh.x; ++x) {
        epi.values[s * sh.x + x] = lf.at(s, fixed_angular_index, x, fixed_spatial_index, channel);
      }
    }
  } else {
    if (fixed_spatial_index >= sh.x || fixed_angular_index >= sh.s) {
      throw RangeError("vertical EPI needs x < " + std::to_string(sh.x) + " and s < " +
                       std::to_string(sh.s));
    }
    epi.spatial = sh.y;
    epi.angular = sh.t;
    epi.values.resize(sh.y * sh.t);
    for (std::size_t t = 0; t < sh.t; ++t) {
      for (std::size_t y = 0; y < sh.y; ++y) {
        epi.values[t * sh.y + y] = lf.at(fixed_angular_index, t, fixed_spatial_index, y, channel);
      }
    }
  }
  return epi;
}

LightField crop_patch(const LightField& lf, std::size_t x0, std::size_t y0,
                      std::size_t w, std::size_t h) {
  const auto& sh = lf.shape();
  if (lf.empty()) throw ContractError("crop_patch on empty light field");
  if (w == 0 || h == 0 || x0 + w > sh.x || y0 + h > sh.y) {
    throw RangeError("crop (" + std::to_string(x0) + "," + std::to_string(y0) + ") size " +
                     std::to_string(w) + "x" + std::to_string(h) + " exceeds " + to_string(sh));
  }
  LightFieldShape out_shape = sh;
  out_shape.x = w;
  out_shape.y = h;
  LightField out(out_shape);
  for (std::size_t s = 0; s < sh.s; ++s) {
    for (std::size_t t = 0; t < sh.t; ++t) {
      for (std::size_t y = 0; y < h; ++y) {
        const double* src = &lf.samples()[lf.index(s, t, x0, y0 + y, 0)];
        double* dst = &out.samples()[out.index(s, t, 0, y, 0)];
        std::copy_n(src, w * sh.c, dst);
      }
    }
  }
  return out;
}

LightField to_luma(const LightField& lf) {
  const auto& sh = lf.shape();
  if (sh.c == 1) return lf;
  LightFieldShape out_shape = sh;
  out_shape.c = 1;
  LightField out(out_shape);
  const auto in = lf.samples();
  auto dst = out.samples();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = 0.299 * in[3 * i] + 0.587 * in[3 * i + 1] + 0.114 * in[3 * i + 2];
  }
  return out;
}

}  // namespace hrolf
