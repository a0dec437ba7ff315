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

#include "hrolf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hrolf/errors.hpp"
#include "hrolf/random.hpp"

namespace hrolf {

namespace {

// Uniform [0, 1) value attached to a lattice point.
double lattice_hash(std::uint64_t seed, std::int64_t i, std::int64_t j) {
  std::uint64_t h = splitmix64(seed ^ 0x9e3779b97f4a7c15ULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(i));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(j) * 0xc2b2ae3d27d4eb4fULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Value noise at one octave: smoothstep interpolation of hashed corners.
double value_noise(std::uint64_t seed, std::int64_t i, std::int64_t j, std::int64_t cell) {
  const std::int64_t ci = floor_div(i, cell);
  const std::int64_t cj = floor_div(j, cell);
  const double fx = static_cast<double>(i - ci * cell) / static_cast<double>(cell);
  const double fy = static_cast<double>(j - cj * cell) / static_cast<double>(cell);
  const double sx = fx * fx * (3.0 - 2.0 * fx);
  const double sy = fy * fy * (3.0 - 2.0 * fy);
  const double a = lattice_hash(seed, ci, cj);
  const double b = lattice_hash(seed, ci + 1, cj);
  const double c = lattice_hash(seed, ci, cj + 1);
  const double d = lattice_hash(seed, ci + 1, cj + 1);
  const double top = a + sx * (b - a);
  const double bottom = c + sx * (d - c);
  return top + sy * (bottom - top);
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.layers.empty()) throw ConfigError("synth config needs at least one layer");
  for (const auto& layer : cfg.layers) {
    if (!std::isfinite(layer.disparity)) throw ConfigError("layer disparity must be finite");
    if (layer.support && (layer.support->w <= 0 || layer.support->h <= 0)) {
      throw ConfigError("layer support must have positive size");
    }
  }
  try {
    validate_shape(cfg.shape);
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
}

double texture_lattice(TextureKind kind, std::uint64_t seed, std::size_t channel,
                       std::int64_t i, std::int64_t j) {
  if (kind == TextureKind::kChecker) {
    const bool odd = ((floor_div(i, 8) + floor_div(j, 8)) & 1) != 0;
    const double base = odd ? 192.0 : 64.0;
    return base - 16.0 * static_cast<double>(channel);
  }
  const std::uint64_t channel_seed = splitmix64(seed + 0x51ed270b27u * (channel + 1));
  // Three octaves, cell sizes 16/8/4 pixels, amplitude halving per octave.
  double v = 0.0;
  double amp = 1.0;
  double norm = 0.0;
  std::int64_t cell = 16;
  for (int octave = 0; octave < 3; ++octave) {
    v += amp * value_noise(channel_seed + static_cast<std::uint64_t>(octave), i, j, cell);
    norm += amp;
    amp *= 0.5;
    cell /= 2;
  }
  return 255.0 * (0.1 + 0.8 * v / norm);
}

double texture_sample(TextureKind kind, std::uint64_t seed, std::size_t channel, double u,
                      double v) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const auto i = static_cast<std::int64_t>(fu);
  const auto j = static_cast<std::int64_t>(fv);
  const double wu = u - fu;
  const double wv = v - fv;
  const double a = texture_lattice(kind, seed, channel, i, j);
  if (wu == 0.0 && wv == 0.0) return a;
  const double b = texture_lattice(kind, seed, channel, i + 1, j);
  const double c = texture_lattice(kind, seed, channel, i, j + 1);
  const double d = texture_lattice(kind, seed, channel, i + 1, j + 1);
  const double top = a + wu * (b - a);
  const double bottom = c + wu * (d - c);
  return top + wv * (bottom - top);
}

SynthResult synth_scene(const SynthConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  const auto& sh = cfg.shape;
  const double s0 = static_cast<double>(center_index(sh.s));
  const double t0 = static_cast<double>(center_index(sh.t));

  // Nearest first; ties keep declaration order.
  std::vector<std::size_t> order(cfg.layers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cfg.layers[a].depth_order < cfg.layers[b].depth_order;
  });
  std::vector<std::uint64_t> layer_seed(cfg.layers.size());
  for (std::size_t l = 0; l < cfg.layers.size(); ++l) {
    layer_seed[l] = splitmix64(seed ^ splitmix64(cfg.layers[l].texture_seed));
  }

  SynthResult result;
  result.field = LightField(sh);
  result.disparity_map = Image(sh.x, sh.y, 1, std::nan(""));
  for (const auto& layer : cfg.layers) result.layer_disparity.push_back(layer.disparity);

  for (std::size_t s = 0; s < sh.s; ++s) {
    for (std::size_t t = 0; t < sh.t; ++t) {
      const double ds = static_cast<double>(s) - s0;
      const double dt = static_cast<double>(t) - t0;
      const bool center = s == center_index(sh.s) && t == center_index(sh.t);
      for (std::size_t y = 0; y < sh.y; ++y) {
        for (std::size_t x = 0; x < sh.x; ++x) {
          for (std::size_t l : order) {
            const SynthLayer& layer = cfg.layers[l];
            const double u = static_cast<double>(x) + layer.disparity * ds;
            const double v = static_cast<double>(y) + layer.disparity * dt;
            if (layer.support && !layer.support->contains(u, v)) continue;
            for (std::size_t ch = 0; ch < sh.c; ++ch) {
              result.field.at(s, t, x, y, ch) = texture_sample(cfg.texture, layer_seed[l], ch, u, v);
            }
            if (center) result.disparity_map.at(x, y) = layer.disparity;
            break;
          }
        }
      }
    }
  }
  return result;
}

SynthConfig two_layer_config(const LightFieldShape& shape, double background_disparity,
                             double foreground_disparity) {
  SynthConfig cfg;
  cfg.shape = shape;
  cfg.layers.push_back({.texture_seed = 1, .disparity = background_disparity, .depth_order = 1,
                        .support = std::nullopt});
  const double w = static_cast<double>(shape.x) * 0.4;
  const double h = static_cast<double>(shape.y) * 0.4;
  cfg.layers.push_back({.texture_seed = 2,
                        .disparity = foreground_disparity,
                        .depth_order = 0,
                        .support = Rect{(static_cast<double>(shape.x) - w) / 2,
                                        (static_cast<double>(shape.y) - h) / 2, w, h}});
  return cfg;
}

}  // namespace hrolf
