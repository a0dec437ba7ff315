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

#include "hrolf/model.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include "hrolf/kv_text.hpp"
#include "hrolf/random.hpp"

namespace hrolf {

void validate(const ModelConfig& cfg) {
  auto fail = [](const std::string& what) { throw ConfigError("model config: " + what); };
  if (cfg.d < 1) fail("d must be >= 1");
  if (cfg.n > cfg.d) fail("n must not exceed d (n=" + std::to_string(cfg.n) + ", d=" + std::to_string(cfg.d) + ")");
  if (cfg.channels < 1) fail("channels must be >= 1");
  if (cfg.scale < 1) fail("scale must be >= 1");
  if (cfg.spatial_kernel % 2 == 0 || cfg.angular_kernel % 2 == 0) fail("kernel extents must be odd");
  if (cfg.in_s < 1 || cfg.in_t < 1) fail("input angular extent must be >= 1");
  if (cfg.out_s < cfg.in_s || cfg.out_t < cfg.in_t) fail("target angular extent must not be smaller than the input");
  if ((cfg.in_s < 2 && cfg.out_s != cfg.in_s) || (cfg.in_t < 2 && cfg.out_t != cfg.in_t)) {
    fail("angular upsampling needs at least 2 input views per axis");
  }
  if (cfg.image_channels != 1 && cfg.image_channels != 3) fail("image_channels must be 1 or 3");
  if (!(cfg.lrelu_slope > 0 && cfg.lrelu_slope < 1)) fail("lrelu_slope must lie in (0, 1)");
  if (!(cfg.bn_eps > 0)) fail("bn_eps must be positive");
  if (!(cfg.bn_momentum >= 0 && cfg.bn_momentum < 1)) fail("bn_momentum must lie in [0, 1)");
}

std::string serialize(const ModelConfig& cfg) {
  KeyValueWriter w;
  w.put("d", cfg.d);
  w.put("n", cfg.n);
  w.put("channels", cfg.channels);
  w.put("spatial_kernel", cfg.spatial_kernel);
  w.put("angular_kernel", cfg.angular_kernel);
  w.put("scale", cfg.scale);
  w.put("in_s", cfg.in_s);
  w.put("in_t", cfg.in_t);
  w.put("out_s", cfg.out_s);
  w.put("out_t", cfg.out_t);
  w.put("image_channels", cfg.image_channels);
  w.put("lrelu_slope", cfg.lrelu_slope);
  w.put("bn_eps", cfg.bn_eps);
  w.put("bn_momentum", cfg.bn_momentum);
  w.put("post_add_lrelu", cfg.post_add_lrelu);
  w.put("seed", cfg.seed);
  return w.str();
}

ModelConfig parse_model_config(const std::string& text) {
  const KeyValueReader r(text, "model config");
  ModelConfig cfg;
  r.get("d", cfg.d);
  r.get("n", cfg.n);
  r.get("channels", cfg.channels);
  r.get("spatial_kernel", cfg.spatial_kernel);
  r.get("angular_kernel", cfg.angular_kernel);
  r.get("scale", cfg.scale);
  r.get("in_s", cfg.in_s);
  r.get("in_t", cfg.in_t);
  r.get("out_s", cfg.out_s);
  r.get("out_t", cfg.out_t);
  r.get("image_channels", cfg.image_channels);
  r.get("lrelu_slope", cfg.lrelu_slope);
  r.get("bn_eps", cfg.bn_eps);
  r.get("bn_momentum", cfg.bn_momentum);
  r.get("post_add_lrelu", cfg.post_add_lrelu);
  r.get("seed", cfg.seed);
  r.reject_unknown();
  return cfg;
}

namespace {

KernelShape layer_kernel(const ModelConfig& cfg, std::size_t c_in, std::size_t c_out) {
  return {cfg.spatial_kernel, cfg.spatial_kernel, cfg.angular_kernel, cfg.angular_kernel, c_in, c_out};
}

// Invokes conv(name, kernel) and norm(name, channels) for every layer in
// construction order.
void visit_layers(const ModelConfig& cfg,
                  const std::function<void(const std::string&, const KernelShape&)>& conv,
                  const std::function<void(const std::string&, std::size_t)>& norm) {
  const std::size_t c = cfg.channels;
  const std::size_t img = cfg.image_channels;
  auto chain = [&](const std::string& name, std::size_t count) {
    for (const std::string& block : hrb_prefixes(name, count)) {
      conv(block + ".conv1", layer_kernel(cfg, c, c));
      norm(block + ".bn1", c);
      conv(block + ".conv2", layer_kernel(cfg, c, c));
      norm(block + ".bn2", c);
    }
    conv(name + ".tail.conv", layer_kernel(cfg, c, c));
    norm(name + ".tail.bn", c);
  };
  conv("shallow", layer_kernel(cfg, img, c));
  chain("grl", cfg.d);
  conv("up.expand", layer_kernel(cfg, c, c * cfg.scale * cfg.scale));
  conv("head.primary", layer_kernel(cfg, c, img));
  chain("sre", cfg.n);
  conv("head.final", layer_kernel(cfg, c, img));
}

std::uint64_t name_hash(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<std::string> hrb_prefixes(const std::string& chain, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= count; ++i) out.push_back(chain + ".hrb" + std::to_string(i));
  return out;
}

std::size_t parameter_count(const ModelConfig& cfg) {
  std::size_t total = 0;
  visit_layers(
      cfg, [&](const std::string&, const KernelShape& k) { total += k.fan_in() * k.c_out + k.c_out; },
      [&](const std::string&, std::size_t c) { total += 2 * c; });
  return total;
}

template <typename Real>
void ModelParams<Real>::add(std::string name, Tensor<Real> value, bool trainable) {
  if (index_.count(name) != 0) throw ContractError("duplicate parameter name " + name);
  index_[name] = entries_.size();
  entries_.push_back({std::move(name), std::move(value), trainable});
}

template <typename Real>
const Tensor<Real>& ModelParams<Real>::get(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter " + name);
  return entries_[it->second].value;
}

template <typename Real>
Tensor<Real>& ModelParams<Real>::get(const std::string& name) {
  const auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter " + name);
  return entries_[it->second].value;
}

template <typename Real>
std::size_t ModelParams<Real>::trainable_count() const {
  std::size_t total = 0;
  for (const auto& e : entries_) {
    if (e.trainable) total += e.value.size();
  }
  return total;
}

template <typename Real>
ModelParams<Real> init_params(const ModelConfig& cfg) {
  validate(cfg);
  ModelParams<Real> params(cfg);
  const double gain = 2.0 / (1.0 + cfg.lrelu_slope * cfg.lrelu_slope);
  visit_layers(
      cfg,
      [&](const std::string& name, const KernelShape& k) {
        Rng rng(derive_seed(cfg.seed, {name_hash(name)}));
        std::normal_distribution<double> normal(0.0, std::sqrt(gain / static_cast<double>(k.fan_in())));
        Tensor<Real> w(k.weight_dims());
        for (Real& v : w.values()) v = static_cast<Real>(normal(rng));
        params.add(name + ".w", std::move(w), true);
        params.add(name + ".b", Tensor<Real>(std::vector<std::size_t>{k.c_out}), true);
      },
      [&](const std::string& name, std::size_t c) {
        params.add(name + ".gamma", Tensor<Real>(std::vector<std::size_t>{c}, Real(1)), true);
        params.add(name + ".beta", Tensor<Real>(std::vector<std::size_t>{c}), true);
        params.add(name + ".running_mean", Tensor<Real>(std::vector<std::size_t>{c}), false);
        params.add(name + ".running_var", Tensor<Real>(std::vector<std::size_t>{c}, Real(1)), false);
      });
  return params;
}

template <typename Real>
BoundParams bind_params(ad::Tape<Real>& tape, const ModelParams<Real>& params, bool trainable) {
  BoundParams vars;
  for (const auto& e : params.entries()) {
    vars[e.name] = trainable && e.trainable ? tape.parameter(e.value) : tape.constant(e.value);
  }
  return vars;
}

namespace {

ad::Var lookup(const BoundParams& vars, const std::string& name) {
  const auto it = vars.find(name);
  if (it == vars.end()) throw ContractError("parameter " + name + " is not bound");
  return it->second;
}

}  // namespace

template <typename Real>
ad::Var conv_layer(const ForwardContext<Real>& ctx, const std::string& layer, ad::Var x,
                   std::size_t stride) {
  return ad::hconv4d(ctx.tape, x, lookup(ctx.vars, layer + ".w"), lookup(ctx.vars, layer + ".b"), stride);
}

template <typename Real>
ad::Var agbn_layer(const ForwardContext<Real>& ctx, const std::string& layer, ad::Var x) {
  ad::AgbnOptions options;
  options.mode = ctx.mode;
  options.eps = ctx.params.config().bn_eps;
  ad::RunningStats running;
  ops::AgbnStats batch;
  if (ctx.mode == ad::NormMode::kEval) {
    const auto& mean = ctx.params.get(layer + ".running_mean");
    const auto& var = ctx.params.get(layer + ".running_var");
    running.mean.assign(mean.values().begin(), mean.values().end());
    running.var.assign(var.values().begin(), var.values().end());
    options.running = &running;
  } else if (ctx.batch_stats != nullptr) {
    options.batch_stats_out = &batch;
  }
  const ad::Var y = ad::agbn(ctx.tape, x, lookup(ctx.vars, layer + ".gamma"),
                             lookup(ctx.vars, layer + ".beta"), options);
  if (options.batch_stats_out != nullptr) (*ctx.batch_stats)[layer] = std::move(batch);
  return y;
}

template <typename Real>
ad::Var hrb_forward(const ForwardContext<Real>& ctx, const std::string& prefix, ad::Var x) {
  const auto slope = static_cast<Real>(ctx.params.config().lrelu_slope);
  ad::Var h = conv_layer(ctx, prefix + ".conv1", x);
  h = agbn_layer(ctx, prefix + ".bn1", h);
  h = ad::lrelu(ctx.tape, h, slope);
  h = conv_layer(ctx, prefix + ".conv2", h);
  h = agbn_layer(ctx, prefix + ".bn2", h);
  ad::Var y = ad::add(ctx.tape, x, h);
  if (ctx.params.config().post_add_lrelu) y = ad::lrelu(ctx.tape, y, slope);
  return y;
}

template <typename Real>
ad::Var residual_chain(const ForwardContext<Real>& ctx, const std::string& chain, std::size_t count,
                       ad::Var x, std::vector<ad::Var>* block_outputs) {
  ad::Var h = x;
  for (const std::string& block : hrb_prefixes(chain, count)) {
    h = hrb_forward(ctx, block, h);
    if (block_outputs != nullptr) block_outputs->push_back(h);
  }
  h = conv_layer(ctx, chain + ".tail.conv", h);
  h = agbn_layer(ctx, chain + ".tail.bn", h);
  return ad::add(ctx.tape, h, x);
}

template <typename Real>
ad::Var grlnet_forward(const ForwardContext<Real>& ctx, ad::Var f0, std::vector<ad::Var>* block_outputs) {
  return residual_chain(ctx, "grl", ctx.params.config().d, f0, block_outputs);
}

template <typename Real>
ad::Var upnet_forward(const ForwardContext<Real>& ctx, ad::Var f_g) {
  const ModelConfig& cfg = ctx.params.config();
  ad::Var h = conv_layer(ctx, "up.expand", f_g);
  const FeatureShape sh = ctx.tape.value(h).feature_shape();
  if (cfg.out_s != sh.s || cfg.out_t != sh.t) h = ad::angular_interp(ctx.tape, h, cfg.out_s, cfg.out_t);
  if (cfg.scale != 1) h = ad::pixel_shuffle(ctx.tape, h, cfg.scale);
  return h;
}

template <typename Real>
ad::Var srenet_forward(const ForwardContext<Real>& ctx, ad::Var f_up, std::vector<ad::Var>* block_outputs) {
  return residual_chain(ctx, "sre", ctx.params.config().n, f_up, block_outputs);
}

template <typename Real>
ModelVars model_forward(const ForwardContext<Real>& ctx, ad::Var input) {
  const ModelConfig& cfg = ctx.params.config();
  const FeatureShape in = ctx.tape.value(input).feature_shape();
  if (in.s != cfg.in_s || in.t != cfg.in_t) {
    throw ConfigError("input angular extent " + std::to_string(in.s) + "x" + std::to_string(in.t) +
                      " does not match the model's " + std::to_string(cfg.in_s) + "x" +
                      std::to_string(cfg.in_t));
  }
  if (in.c != cfg.image_channels) {
    throw ConfigError("input has " + std::to_string(in.c) + " channels, model expects " +
                      std::to_string(cfg.image_channels));
  }
  ModelVars v;
  v.f0 = conv_layer(ctx, "shallow", input);
  v.f_g = grlnet_forward(ctx, v.f0, &v.grl_blocks);
  v.f_up = upnet_forward(ctx, v.f_g);
  v.primary = conv_layer(ctx, "head.primary", v.f_up);
  v.f_r = srenet_forward(ctx, v.f_up, &v.sre_blocks);
  v.final_output = conv_layer(ctx, "head.final", v.f_r);
  return v;
}

template <typename Real>
Tensor<Real> to_tensor(const LightField& lf, double scale) {
  return stack_batch<Real>({lf}, scale);
}

template <typename Real>
Tensor<Real> stack_batch(const std::vector<LightField>& fields, double scale) {
  if (fields.empty()) throw ContractError("stack_batch needs at least one field");
  const LightFieldShape sh = fields.front().shape();
  validate_shape(sh);
  const FeatureShape fs{fields.size(), sh.s, sh.t, sh.x, sh.y, sh.c};
  Tensor<Real> out(fs);
  for (std::size_t b = 0; b < fields.size(); ++b) {
    const LightField& lf = fields[b];
    if (lf.shape() != sh) throw ShapeError("stack_batch: fields differ in shape");
    for (std::size_t s = 0; s < sh.s; ++s) {
      for (std::size_t t = 0; t < sh.t; ++t) {
        for (std::size_t x = 0; x < sh.x; ++x) {
          for (std::size_t y = 0; y < sh.y; ++y) {
            for (std::size_t c = 0; c < sh.c; ++c) {
              out[fs.index(b, s, t, x, y, c)] = static_cast<Real>(lf.at(s, t, x, y, c) * scale);
            }
          }
        }
      }
    }
  }
  return out;
}

template <typename Real>
LightField to_lightfield(const Tensor<Real>& x, std::size_t batch, double scale) {
  const FeatureShape fs = x.feature_shape();
  if (batch >= fs.n) throw RangeError("batch index out of range");
  LightField lf(LightFieldShape{fs.s, fs.t, fs.x, fs.y, fs.c});
  for (std::size_t s = 0; s < fs.s; ++s) {
    for (std::size_t t = 0; t < fs.t; ++t) {
      for (std::size_t xx = 0; xx < fs.x; ++xx) {
        for (std::size_t y = 0; y < fs.y; ++y) {
          for (std::size_t c = 0; c < fs.c; ++c) {
            lf.at(s, t, xx, y, c) = static_cast<double>(x[fs.index(batch, s, t, xx, y, c)]) * scale;
          }
        }
      }
    }
  }
  return lf;
}

template <typename Real>
SuperResolved model_forward(const LightField& low_res, const ModelParams<Real>& params) {
  ad::Tape<Real> tape;
  const BoundParams vars = bind_params(tape, params, false);
  const ForwardContext<Real> ctx{tape, params, vars, ad::NormMode::kEval, nullptr};
  const ad::Var input = tape.constant(to_tensor<Real>(low_res));
  const ModelVars out = model_forward(ctx, input);
  return {to_lightfield(tape.value(out.primary)), to_lightfield(tape.value(out.final_output))};
}

#define HROLF_INSTANTIATE_MODEL(Real)                                                              \
  template class ModelParams<Real>;                                                                \
  template ModelParams<Real> init_params<Real>(const ModelConfig&);                                \
  template BoundParams bind_params(ad::Tape<Real>&, const ModelParams<Real>&, bool);               \
  template ad::Var conv_layer(const ForwardContext<Real>&, const std::string&, ad::Var, std::size_t); \
  template ad::Var agbn_layer(const ForwardContext<Real>&, const std::string&, ad::Var);           \
  template ad::Var hrb_forward(const ForwardContext<Real>&, const std::string&, ad::Var);          \
  template ad::Var residual_chain(const ForwardContext<Real>&, const std::string&, std::size_t,    \
                                  ad::Var, std::vector<ad::Var>*);                                 \
  template ad::Var grlnet_forward(const ForwardContext<Real>&, ad::Var, std::vector<ad::Var>*);    \
  template ad::Var upnet_forward(const ForwardContext<Real>&, ad::Var);                            \
  template ad::Var srenet_forward(const ForwardContext<Real>&, ad::Var, std::vector<ad::Var>*);    \
  template ModelVars model_forward(const ForwardContext<Real>&, ad::Var);                          \
  template Tensor<Real> to_tensor<Real>(const LightField&, double);                                \
  template Tensor<Real> stack_batch<Real>(const std::vector<LightField>&, double);                 \
  template LightField to_lightfield(const Tensor<Real>&, std::size_t, double);                     \
  template SuperResolved model_forward(const LightField&, const ModelParams<Real>&);

HROLF_INSTANTIATE_MODEL(float)
HROLF_INSTANTIATE_MODEL(double)

#undef HROLF_INSTANTIATE_MODEL

}  // namespace hrolf
