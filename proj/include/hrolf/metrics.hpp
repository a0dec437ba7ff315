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

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hrolf/degrade.hpp"
#include "hrolf/lightfield.hpp"

namespace hrolf {

// Returned by psnr() for identical inputs.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

// 10 log10(peak^2 / MSE). Throws ShapeError on size mismatch.
double psnr(std::span<const double> a, std::span<const double> b, double peak = 255.0);
double psnr(const Image& a, const Image& b, double peak = 255.0);

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 255.0;
};

// Mean SSIM over every fully contained Gaussian window (no padding) of two
// single-channel images. Throws ConfigError when an image is smaller than
// the window, ShapeError on mismatched or multi-channel inputs.
double ssim(const Image& a, const Image& b, const SsimOptions& options = {});

enum class EvalMode { kAllViews, kSynthesizedOnly };

EvalMode parse_eval_mode(const std::string& name);

struct EvalOptions {
  EvalMode mode = EvalMode::kAllViews;
  // Views present in the decimated input; excluded in kSynthesizedOnly.
  std::optional<AngularSelection> input_views;
  double peak = 255.0;
  bool luma = true;       // evaluate BT.601 luma of RGB fields
  bool with_ssim = true;  // SSIM entries are NaN when off
};

struct ViewMetrics {
  std::size_t s = 0;
  std::size_t t = 0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  std::vector<ViewMetrics> views;  // row-major (s, t) order
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

EvalReport eval_lf(const LightField& pred, const LightField& truth, const EvalOptions& options = {});

// "view s t psnr ssim" table followed by the averages.
std::string format_report_text(const EvalReport& report);
// One "key=value" record per line: view.<s>.<t>.psnr=..., mean.psnr=...
std::string format_report_kv(const EvalReport& report);

}  // namespace hrolf
