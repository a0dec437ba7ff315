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

#include "hrolf/resample.hpp"

#include <algorithm>
#include <cmath>

#include "hrolf/errors.hpp"
#include "hrolf/ops.hpp"

namespace hrolf {

SpatialMethod parse_spatial_method(const std::string& name) {
  if (name == "bicubic") return SpatialMethod::kBicubic;
  if (name == "linear" || name == "bilinear") return SpatialMethod::kLinear;
  throw ConfigError("unknown interpolation method '" + name + "' (bicubic|linear)");
}

double cubic_weight(double d) {
  constexpr double a = -0.5;
  d = std::abs(d);
  if (d <= 1.0) return ((a + 2.0) * d - (a + 3.0)) * d * d + 1.0;
  if (d < 2.0) return ((a * d - 5.0 * a) * d + 8.0 * a) * d - 4.0 * a;
  return 0.0;
}

namespace {

struct Taps {
  std::size_t index[4];
  double weight[4];
  int count;
};

Taps taps_for(std::size_t hr, std::size_t scale, std::size_t n, SpatialMethod method) {
  const std::size_t base = hr / scale;
  const double frac = static_cast<double>(hr % scale) / static_cast<double>(scale);
  auto clamp = [n](std::int64_t i) {
    return static_cast<std::size_t>(std::clamp<std::int64_t>(i, 0, static_cast<std::int64_t>(n) - 1));
  };
  Taps taps{};
  const auto b = static_cast<std::int64_t>(base);
  if (method == SpatialMethod::kLinear) {
    taps.count = 2;
    taps.index[0] = clamp(b);
    taps.index[1] = clamp(b + 1);
    taps.weight[0] = 1.0 - frac;
    taps.weight[1] = frac;
  } else {
    taps.count = 4;
    for (int k = 0; k < 4; ++k) {
      taps.index[k] = clamp(b - 1 + k);
      taps.weight[k] = cubic_weight(frac - static_cast<double>(k - 1));
    }
  }
  return taps;
}

}  // namespace

Image upsample_image(const Image& image, std::size_t scale, SpatialMethod method) {
  if (scale < 1) throw ConfigError("upsampling scale must be >= 1");
  const std::size_t w = image.width * scale;
  const std::size_t h = image.height * scale;
  Image rows(w, image.height, image.channels);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const Taps tx = taps_for(x, scale, image.width, method);
      for (std::size_t c = 0; c < image.channels; ++c) {
        double acc = 0.0;
        for (int k = 0; k < tx.count; ++k) acc += tx.weight[k] * image.at(tx.index[k], y, c);
        rows.at(x, y, c) = acc;
      }
    }
  }
  Image out(w, h, image.channels);
  for (std::size_t y = 0; y < h; ++y) {
    const Taps ty = taps_for(y, scale, image.height, method);
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < image.channels; ++c) {
        double acc = 0.0;
        for (int k = 0; k < ty.count; ++k) acc += ty.weight[k] * rows.at(x, ty.index[k], c);
        out.at(x, y, c) = acc;
      }
    }
  }
  return out;
}

LightField upsample_spatial(const LightField& lf, std::size_t scale, SpatialMethod method) {
  const LightFieldShape sh = lf.shape();
  validate_shape(sh);
  LightField out({sh.s, sh.t, sh.x * scale, sh.y * scale, sh.c});
  for (std::size_t s = 0; s < sh.s; ++s) {
    for (std::size_t t = 0; t < sh.t; ++t) out.set_view(s, t, upsample_image(lf.view(s, t), scale, method));
  }
  return out;
}

namespace {

Image lerp_views(const Image& a, const Image& b, double w) {
  Image out = a;
  if (w == 0.0) return out;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] + w * (b.values[i] - a.values[i]);
  return out;
}

}  // namespace

LightField angular_linear_interp(const LightField& lf, std::size_t s_out, std::size_t t_out) {
  const LightFieldShape sh = lf.shape();
  validate_shape(sh);
  auto check = [](std::size_t n, std::size_t n_out) {
    if (n_out < n || (n < 2 && n_out != n)) {
      throw ContractError("angular interpolation from " + std::to_string(n) + " to " + std::to_string(n_out) +
                          " views is not an upsampling");
    }
  };
  check(sh.s, s_out);
  check(sh.t, t_out);
  const std::vector<ops::InterpTap> ts = ops::angular_taps(sh.s, s_out);
  const std::vector<ops::InterpTap> tt = ops::angular_taps(sh.t, t_out);
  LightField mid({s_out, sh.t, sh.x, sh.y, sh.c});
  for (std::size_t s = 0; s < s_out; ++s) {
    const std::size_t s1 = std::min(ts[s].base + 1, sh.s - 1);
    for (std::size_t t = 0; t < sh.t; ++t) {
      mid.set_view(s, t, lerp_views(lf.view(ts[s].base, t), lf.view(s1, t), ts[s].frac));
    }
  }
  LightField out({s_out, t_out, sh.x, sh.y, sh.c});
  for (std::size_t s = 0; s < s_out; ++s) {
    for (std::size_t t = 0; t < t_out; ++t) {
      const std::size_t t1 = std::min(tt[t].base + 1, sh.t - 1);
      out.set_view(s, t, lerp_views(mid.view(s, tt[t].base), mid.view(s, t1), tt[t].frac));
    }
  }
  return out;
}

}  // namespace hrolf
