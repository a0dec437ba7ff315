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

#include "hrolf/autodiff.hpp"

namespace hrolf::ad {

template <typename Real>
Var hconv4d(Tape<Real>& tape, Var input, Var weights, Var bias, std::size_t stride) {
  Tensor<Real> out = ops::conv4d_forward(tape.value(input), tape.value(weights), tape.value(bias), stride);
  return tape.record(std::move(out), {input, weights, bias},
                     [input, weights, bias, stride](Tape<Real>& t, const Tensor<Real>& g) {
                       const bool need_input = t.requires_grad(input);
                       auto grads = ops::conv4d_backward(t.value(input), t.value(weights), g, stride,
                                                         need_input);
                       if (need_input) t.accumulate(input, grads.input);
                       t.accumulate(weights, grads.weights);
                       t.accumulate(bias, grads.bias);
                     });
}

template <typename Real>
Var lrelu(Tape<Real>& tape, Var x, Real slope) {
  if (!(slope > Real(0) && slope < Real(1))) throw ContractError("lrelu slope must lie in (0, 1)");
  return tape.record(ops::lrelu_forward(tape.value(x), slope), {x},
                     [x, slope](Tape<Real>& t, const Tensor<Real>& g) {
                       t.accumulate(x, ops::lrelu_backward(t.value(x), g, slope));
                     });
}

template <typename Real>
Var agbn(Tape<Real>& tape, Var x, Var gamma, Var beta, const AgbnOptions& options) {
  if (!(options.eps > 0)) throw ContractError("agbn eps must be positive");
  const Tensor<Real>& xv = tape.value(x);
  ops::AgbnStats stats;
  const bool train = options.mode == NormMode::kTrain;
  if (train) {
    stats = ops::agbn_statistics(xv);
    if (options.batch_stats_out != nullptr) *options.batch_stats_out = stats;
  } else {
    if (options.running == nullptr) throw ContractError("agbn eval mode needs running statistics");
    stats.mean = options.running->mean;
    stats.var = options.running->var;
  }
  Tensor<Real> out = ops::agbn_apply(xv, tape.value(gamma), tape.value(beta), stats.mean, stats.var,
                                     options.eps);
  const double eps = options.eps;
  return tape.record(std::move(out), {x, gamma, beta},
                     [x, gamma, beta, stats = std::move(stats), eps, train](Tape<Real>& t,
                                                                           const Tensor<Real>& g) {
                       auto grads = ops::agbn_backward(t.value(x), t.value(gamma), stats.mean,
                                                       stats.var, eps, g, train);
                       t.accumulate(x, grads.x);
                       t.accumulate(gamma, grads.gamma);
                       t.accumulate(beta, grads.beta);
                     });
}

template <typename Real>
Var add(Tape<Real>& tape, Var a, Var b) {
  const Tensor<Real>& av = tape.value(a);
  const Tensor<Real>& bv = tape.value(b);
  if (!av.same_shape(bv)) {
    throw ShapeError("add: shape mismatch " + dims_to_string(av.dims()) + " vs " +
                     dims_to_string(bv.dims()));
  }
  Tensor<Real> out(av.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return tape.record(std::move(out), {a, b}, [a, b](Tape<Real>& t, const Tensor<Real>& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

template <typename Real>
Var pixel_shuffle(Tape<Real>& tape, Var x, std::size_t r) {
  return tape.record(ops::pixel_shuffle(tape.value(x), r), {x},
                     [x, r](Tape<Real>& t, const Tensor<Real>& g) {
                       t.accumulate(x, ops::pixel_unshuffle(g, r));
                     });
}

template <typename Real>
Var angular_interp(Tape<Real>& tape, Var x, std::size_t s_out, std::size_t t_out) {
  const FeatureShape in = tape.value(x).feature_shape();
  return tape.record(ops::angular_interp_forward(tape.value(x), s_out, t_out), {x},
                     [x, in](Tape<Real>& t, const Tensor<Real>& g) {
                       t.accumulate(x, ops::angular_interp_backward(g, in.s, in.t));
                     });
}

template <typename Real>
Var sum(Tape<Real>& tape, Var x) {
  const Tensor<Real>& xv = tape.value(x);
  double total = 0.0;
  for (Real v : xv.values()) total += static_cast<double>(v);
  return tape.record(Tensor<Real>::scalar(static_cast<Real>(total)), {x},
                     [x](Tape<Real>& t, const Tensor<Real>& g) {
                       t.accumulate(x, Tensor<Real>(t.value(x).dims(), g.item()));
                     });
}

template <typename Real>
Var squared_error(Tape<Real>& tape, Var a, Var b, Reduction reduction) {
  const Tensor<Real>& av = tape.value(a);
  const Tensor<Real>& bv = tape.value(b);
  if (!av.same_shape(bv)) {
    throw ShapeError("squared_error: shape mismatch " + dims_to_string(av.dims()) + " vs " +
                     dims_to_string(bv.dims()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = static_cast<double>(av[i]) - static_cast<double>(bv[i]);
    total += d * d;
  }
  const double scale = reduction == Reduction::kMean ? 1.0 / static_cast<double>(av.size()) : 1.0;
  return tape.record(Tensor<Real>::scalar(static_cast<Real>(total * scale)), {a, b},
                     [a, b, scale](Tape<Real>& t, const Tensor<Real>& g) {
                       const Tensor<Real>& av = t.value(a);
                       const Tensor<Real>& bv = t.value(b);
                       const Real k = static_cast<Real>(2.0 * scale) * g.item();
                       Tensor<Real> ga(av.dims());
                       for (std::size_t i = 0; i < av.size(); ++i) ga[i] = k * (av[i] - bv[i]);
                       t.accumulate(a, ga);
                       if (t.requires_grad(b)) {
                         for (Real& v : ga.values()) v = -v;
                         t.accumulate(b, ga);
                       }
                     });
}

template <typename Real>
Var dot(Tape<Real>& tape, Var x, const Tensor<Real>& weights) {
  const Tensor<Real>& xv = tape.value(x);
  if (xv.size() != weights.size()) throw ShapeError("dot: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    total += static_cast<double>(xv[i]) * static_cast<double>(weights[i]);
  }
  return tape.record(Tensor<Real>::scalar(static_cast<Real>(total)), {x},
                     [x, weights](Tape<Real>& t, const Tensor<Real>& g) {
                       Tensor<Real> gx(t.value(x).dims());
                       for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = g.item() * weights[i];
                       t.accumulate(x, gx);
                     });
}

template <typename Real>
Var linear_combination(Tape<Real>& tape, Var a, Real ca, Var b, Real cb) {
  const Tensor<Real>& av = tape.value(a);
  const Tensor<Real>& bv = tape.value(b);
  if (!av.same_shape(bv)) throw ShapeError("linear_combination: shape mismatch");
  Tensor<Real> out(av.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ca * av[i] + cb * bv[i];
  return tape.record(std::move(out), {a, b}, [a, ca, b, cb](Tape<Real>& t, const Tensor<Real>& g) {
    Tensor<Real> ga(g.dims());
    Tensor<Real> gb(g.dims());
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] = ca * g[i];
      gb[i] = cb * g[i];
    }
    t.accumulate(a, ga);
    t.accumulate(b, gb);
  });
}

#define HROLF_INSTANTIATE_AD(Real)                                                        \
  template Var hconv4d(Tape<Real>&, Var, Var, Var, std::size_t);                          \
  template Var lrelu(Tape<Real>&, Var, Real);                                             \
  template Var agbn(Tape<Real>&, Var, Var, Var, const AgbnOptions&);                      \
  template Var add(Tape<Real>&, Var, Var);                                                \
  template Var pixel_shuffle(Tape<Real>&, Var, std::size_t);                              \
  template Var angular_interp(Tape<Real>&, Var, std::size_t, std::size_t);                \
  template Var sum(Tape<Real>&, Var);                                                     \
  template Var squared_error(Tape<Real>&, Var, Var, Reduction);                           \
  template Var dot(Tape<Real>&, Var, const Tensor<Real>&);                                \
  template Var linear_combination(Tape<Real>&, Var, Real, Var, Real);

HROLF_INSTANTIATE_AD(float)
HROLF_INSTANTIATE_AD(double)

#undef HROLF_INSTANTIATE_AD

}  // namespace hrolf::ad
