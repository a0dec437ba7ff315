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

#include "hrolf/degrade.hpp"

#include <cmath>
#include <set>

#include "hrolf/errors.hpp"
#include "hrolf/random.hpp"

namespace hrolf {

void validate(const DegradationConfig& cfg) {
  if (cfg.scale < 1) throw ConfigError("degradation scale must be >= 1");
  if (cfg.blur_size % 2 == 0) throw ConfigError("blur window must be odd, got " + std::to_string(cfg.blur_size));
  if (!(cfg.sigma > 0) || !std::isfinite(cfg.sigma)) throw ConfigError("blur sigma must be positive");
  if (!(cfg.noise_std >= 0) || !std::isfinite(cfg.noise_std)) throw ConfigError("noise_std must be >= 0");
}

std::vector<double> gaussian_kernel(std::size_t size, double sigma) {
  if (size % 2 == 0) throw ConfigError("gaussian kernel size must be odd, got " + std::to_string(size));
  if (!(sigma > 0)) throw ConfigError("gaussian sigma must be positive");
  const auto r = static_cast<std::int64_t>(size / 2);
  std::vector<double> k(size * size);
  double total = 0.0;
  for (std::int64_t i = -r; i <= r; ++i) {
    for (std::int64_t j = -r; j <= r; ++j) {
      const double v = std::exp(-static_cast<double>(i * i + j * j) / (2.0 * sigma * sigma));
      k[static_cast<std::size_t>((i + r) * static_cast<std::int64_t>(size) + (j + r))] = v;
      total += v;
    }
  }
  for (double& v : k) v /= total;
  return k;
}

std::size_t reflect_index(std::int64_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::int64_t>(2 * (n - 1));
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<std::int64_t>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

Image blur_image(const Image& image, const std::vector<double>& kernel, std::size_t size) {
  if (kernel.size() != size * size) throw ContractError("blur kernel size mismatch");
  const auto r = static_cast<std::int64_t>(size / 2);
  const std::size_t w = image.width;
  const std::size_t h = image.height;
  const std::size_t ch = image.channels;
  Image out(w, h, ch);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (std::int64_t i = -r; i <= r; ++i) {
          const std::size_t yy = reflect_index(static_cast<std::int64_t>(y) + i, h);
          for (std::int64_t j = -r; j <= r; ++j) {
            const std::size_t xx = reflect_index(static_cast<std::int64_t>(x) + j, w);
            acc += kernel[static_cast<std::size_t>((i + r) * static_cast<std::int64_t>(size) + (j + r))] *
                   image.at(xx, yy, c);
          }
        }
        out.at(x, y, c) = acc;
      }
    }
  }
  return out;
}

LightField degrade_spatial(const LightField& hr, const DegradationConfig& cfg) {
  validate(cfg);
  const LightFieldShape sh = hr.shape();
  validate_shape(sh);
  if (sh.x % cfg.scale != 0 || sh.y % cfg.scale != 0) {
    throw ConfigError("spatial extent " + std::to_string(sh.x) + "x" + std::to_string(sh.y) +
                      " is not divisible by scale " + std::to_string(cfg.scale));
  }
  const std::vector<double> kernel = gaussian_kernel(cfg.blur_size, cfg.sigma);
  const LightFieldShape lo{sh.s, sh.t, sh.x / cfg.scale, sh.y / cfg.scale, sh.c};
  LightField out(lo);
  for (std::size_t s = 0; s < sh.s; ++s) {
    for (std::size_t t = 0; t < sh.t; ++t) {
      const Image blurred = blur_image(hr.view(s, t), kernel, cfg.blur_size);
      Rng rng(derive_seed(cfg.noise_seed, {s, t}));
      std::normal_distribution<double> noise(0.0, cfg.noise_std > 0 ? cfg.noise_std : 1.0);
      for (std::size_t y = 0; y < lo.y; ++y) {
        for (std::size_t x = 0; x < lo.x; ++x) {
          for (std::size_t c = 0; c < sh.c; ++c) {
            double v = blurred.at(x * cfg.scale, y * cfg.scale, c);
            if (cfg.noise_std > 0) v += noise(rng);
            out.at(s, t, x, y, c) = v;
          }
        }
      }
    }
  }
  return out;
}

std::vector<std::size_t> uniform_indices(std::size_t n, std::size_t k) {
  if (k == 0 || k > n) {
    throw RangeError("cannot select " + std::to_string(k) + " of " + std::to_string(n) + " views");
  }
  if (k == 1) return {center_index(n)};
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = static_cast<std::size_t>(std::llround(static_cast<double>(i * (n - 1)) / static_cast<double>(k - 1)));
  }
  return out;
}

AngularSelection angular_task(const LightFieldShape& shape, const std::string& spec) {
  std::size_t ks = 0;
  std::size_t kt = 0;
  char sep = 0;
  char extra = 0;
  if (std::sscanf(spec.c_str(), "%zu%c%zu%c", &ks, &sep, &kt, &extra) != 3 || sep != 'x') {
    throw ConfigError("angular task must look like 3x3, got '" + spec + "'");
  }
  return {uniform_indices(shape.s, ks), uniform_indices(shape.t, kt)};
}

namespace {

void check_selection(const std::vector<std::size_t>& idx, std::size_t n, const char* axis) {
  if (idx.empty()) throw RangeError(std::string("empty angular selection on ") + axis);
  std::set<std::size_t> seen;
  for (std::size_t i : idx) {
    if (i >= n) {
      throw RangeError(std::string("angular index ") + std::to_string(i) + " on " + axis +
                       " out of range [0, " + std::to_string(n) + ")");
    }
    if (!seen.insert(i).second) throw RangeError(std::string("repeated angular index on ") + axis);
  }
}

}  // namespace

LightField decimate_angular(const LightField& lf, const AngularSelection& selection) {
  const LightFieldShape sh = lf.shape();
  validate_shape(sh);
  check_selection(selection.s, sh.s, "s");
  check_selection(selection.t, sh.t, "t");
  LightField out({selection.s.size(), selection.t.size(), sh.x, sh.y, sh.c});
  for (std::size_t i = 0; i < selection.s.size(); ++i) {
    for (std::size_t j = 0; j < selection.t.size(); ++j) {
      out.set_view(i, j, lf.view(selection.s[i], selection.t[j]));
    }
  }
  return out;
}

LightField embed_angular(const LightField& low, const AngularSelection& selection,
                         const LightFieldShape& full_shape) {
  validate_shape(full_shape);
  check_selection(selection.s, full_shape.s, "s");
  check_selection(selection.t, full_shape.t, "t");
  const LightFieldShape sh = low.shape();
  if (sh.s != selection.s.size() || sh.t != selection.t.size() || sh.x != full_shape.x ||
      sh.y != full_shape.y || sh.c != full_shape.c) {
    throw ShapeError("embed_angular: field " + to_string(sh) + " does not match selection in " +
                     to_string(full_shape));
  }
  LightField out(full_shape);
  for (std::size_t i = 0; i < sh.s; ++i) {
    for (std::size_t j = 0; j < sh.t; ++j) out.set_view(selection.s[i], selection.t[j], low.view(i, j));
  }
  return out;
}

}  // namespace hrolf
