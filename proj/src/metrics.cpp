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

#include "hrolf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hrolf/errors.hpp"

namespace hrolf {

double psnr(std::span<const double> a, std::span<const double> b, double peak) {
  if (a.size() != b.size() || a.empty()) throw ShapeError("psnr: inputs differ in size or are empty");
  if (!(peak > 0)) throw ConfigError("psnr peak must be positive");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += (a[i] - b[i]) * (a[i] - b[i]);
  if (total == 0.0) return kPsnrIdentical;
  const double mse = total / static_cast<double>(a.size());
  return 10.0 * std::log10(peak * peak / mse);
}

double psnr(const Image& a, const Image& b, double peak) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw ShapeError("psnr: image shapes differ");
  }
  return psnr(std::span<const double>(a.values), std::span<const double>(b.values), peak);
}

double ssim(const Image& a, const Image& b, const SsimOptions& o) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw ShapeError("ssim: image shapes differ");
  }
  if (a.channels != 1) throw ShapeError("ssim needs single-channel images");
  if (o.window % 2 == 0 || o.window == 0) throw ConfigError("ssim window must be odd");
  if (a.width < o.window || a.height < o.window) {
    throw ConfigError("ssim: image " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                      " is smaller than the " + std::to_string(o.window) + "x" + std::to_string(o.window) +
                      " window");
  }
  const std::size_t n = o.window;
  const auto r = static_cast<double>(n / 2);
  std::vector<double> g1(n);
  double gsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) - r;
    g1[i] = std::exp(-d * d / (2.0 * o.sigma * o.sigma));
    gsum += g1[i];
  }
  for (double& v : g1) v /= gsum;

  const double c1 = (o.k1 * o.peak) * (o.k1 * o.peak);
  const double c2 = (o.k2 * o.peak) * (o.k2 * o.peak);
  const std::size_t ow = a.width - n + 1;
  const std::size_t oh = a.height - n + 1;
  double total = 0.0;
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
          const double w = g1[i] * g1[j];
          const double va = a.at(x + i, y + j);
          const double vb = b.at(x + i, y + j);
          ma += w * va;
          mb += w * vb;
          saa += w * va * va;
          sbb += w * vb * vb;
          sab += w * va * vb;
        }
      }
      const double var_a = saa - ma * ma;
      const double var_b = sbb - mb * mb;
      const double cov = sab - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
    }
  }
  return total / static_cast<double>(ow * oh);
}

EvalMode parse_eval_mode(const std::string& name) {
  if (name == "all" || name == "all-views") return EvalMode::kAllViews;
  if (name == "synth" || name == "synthesized-only") return EvalMode::kSynthesizedOnly;
  throw ConfigError("unknown eval mode '" + name + "' (all-views|synthesized-only)");
}

EvalReport eval_lf(const LightField& pred, const LightField& truth, const EvalOptions& options) {
  if (pred.shape() != truth.shape()) {
    throw ShapeError("eval: shape mismatch " + to_string(pred.shape()) + " vs " + to_string(truth.shape()));
  }
  validate_shape(pred.shape());
  const bool synth_only = options.mode == EvalMode::kSynthesizedOnly;
  if (synth_only && !options.input_views) {
    throw ConfigError("synthesized-only evaluation needs the input view selection");
  }
  const LightField a = options.luma ? to_luma(pred) : pred;
  const LightField b = options.luma ? to_luma(truth) : truth;
  const LightFieldShape sh = a.shape();
  auto is_input = [&](std::size_t s, std::size_t t) {
    const auto& sel = *options.input_views;
    return std::find(sel.s.begin(), sel.s.end(), s) != sel.s.end() &&
           std::find(sel.t.begin(), sel.t.end(), t) != sel.t.end();
  };

  EvalReport report;
  double psum = 0.0;
  double ssum = 0.0;
  for (std::size_t s = 0; s < sh.s; ++s) {
    for (std::size_t t = 0; t < sh.t; ++t) {
      if (synth_only && is_input(s, t)) continue;
      const Image va = a.view(s, t);
      const Image vb = b.view(s, t);
      ViewMetrics m{s, t, psnr(va, vb, options.peak), std::nan("")};
      if (options.with_ssim) {
        SsimOptions so;
        so.peak = options.peak;
        if (va.channels == 1) {
          m.ssim = ssim(va, vb, so);
        } else {
          // Per-channel mean for fields evaluated without luma conversion.
          double acc = 0.0;
          for (std::size_t c = 0; c < va.channels; ++c) {
            Image ca(va.width, va.height, 1);
            Image cb(va.width, va.height, 1);
            for (std::size_t i = 0; i < ca.values.size(); ++i) {
              ca.values[i] = va.values[i * va.channels + c];
              cb.values[i] = vb.values[i * va.channels + c];
            }
            acc += ssim(ca, cb, so);
          }
          m.ssim = acc / static_cast<double>(va.channels);
        }
      }
      psum += m.psnr;
      ssum += m.ssim;
      report.views.push_back(m);
    }
  }
  if (report.views.empty()) throw ConfigError("eval: no views selected");
  const auto count = static_cast<double>(report.views.size());
  report.mean_psnr = psum / count;
  report.mean_ssim = ssum / count;
  return report;
}

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string format_report_text(const EvalReport& report) {
  std::ostringstream out;
  out << "view_s view_t psnr_db ssim\n";
  for (const auto& v : report.views) out << v.s << ' ' << v.t << ' ' << num(v.psnr) << ' ' << num(v.ssim) << '\n';
  out << "mean psnr_db " << num(report.mean_psnr) << " ssim " << num(report.mean_ssim) << " views "
      << report.views.size() << '\n';
  return out.str();
}

std::string format_report_kv(const EvalReport& report) {
  std::ostringstream out;
  for (const auto& v : report.views) {
    const std::string key = "view." + std::to_string(v.s) + "." + std::to_string(v.t);
    out << key << ".psnr=" << num(v.psnr) << '\n' << key << ".ssim=" << num(v.ssim) << '\n';
  }
  out << "mean.psnr=" << num(report.mean_psnr) << '\n'
      << "mean.ssim=" << num(report.mean_ssim) << '\n'
      << "views=" << report.views.size() << '\n';
  return out.str();
}

}  // namespace hrolf
