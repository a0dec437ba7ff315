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

#include <cstdint>
#include <optional>
#include <vector>

#include "hrolf/lightfield.hpp"

namespace hrolf {

enum class TextureKind { kNoise, kChecker };

// Axis-aligned support of a layer, in center-view pixel coordinates.
struct Rect {
  double x0 = 0;
  double y0 = 0;
  double w = 0;
  double h = 0;

  bool contains(double u, double v) const { return u >= x0 && u < x0 + w && v >= y0 && v < y0 + h; }
};

struct SynthLayer {
  std::uint64_t texture_seed = 0;
  double disparity = 0.0;     // pixels per view step
  int depth_order = 0;        // smaller is nearer; nearer layers occlude
  std::optional<Rect> support;  // unbounded when empty
};

struct SynthConfig {
  std::vector<SynthLayer> layers;
  LightFieldShape shape{9, 9, 64, 64, 1};
  TextureKind texture = TextureKind::kNoise;
};

struct SynthResult {
  LightField field;
  std::vector<double> layer_disparity;
  Image disparity_map;  // center view, disparity of the visible layer
};

// Throws ConfigError on an empty layer list, non-finite disparity or an
// invalid shape.
void validate(const SynthConfig& cfg);

// Procedural texture value on the integer lattice, in [0, 255]. Pure function
// of (kind, seed, channel, i, j).
double texture_lattice(TextureKind kind, std::uint64_t seed, std::size_t channel,
                       std::int64_t i, std::int64_t j);

// Bilinear interpolation of the lattice texture. Integer coordinates return
// lattice values exactly.
double texture_sample(TextureKind kind, std::uint64_t seed, std::size_t channel,
                      double u, double v);

// View (s, t) of layer L samples its texture at
// (x + d_L (s - s0), y + d_L (t - t0)), s0/t0 being the center view. Per
// pixel the nearest layer whose support contains that point wins.
SynthResult synth_scene(const SynthConfig& cfg, std::uint64_t seed);

// Two-layer scene used by the CLI defaults and the acceptance suite: a noise
// background and a nearer square occluder.
SynthConfig two_layer_config(const LightFieldShape& shape, double background_disparity,
                             double foreground_disparity);

}  // namespace hrolf
