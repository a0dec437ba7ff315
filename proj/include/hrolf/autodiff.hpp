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
#include <functional>
#include <initializer_list>
#include <limits>
#include <vector>

#include "hrolf/ops.hpp"
#include "hrolf/tensor.hpp"

namespace hrolf::ad {

// Handle to a node on a Tape.
struct Var {
  static constexpr std::size_t kInvalid = std::numeric_limits<std::size_t>::max();
  std::size_t id = kInvalid;
  bool valid() const { return id != kInvalid; }
};

// Reverse-mode tape. Nodes are appended in evaluation order, so inputs always
// precede their consumers; backward() walks the nodes in exact reverse order.
// Nodes that do not depend on a parameter drop their backward closure.
//
// A tape belongs to one training context and is not thread-safe.
template <typename Real>
class Tape {
 public:
  using TensorT = Tensor<Real>;
  using BackwardFn = std::function<void(Tape&, const TensorT& grad_out)>;

  Var constant(TensorT value) { return append(std::move(value), false, nullptr); }
  Var parameter(TensorT value) { return append(std::move(value), true, nullptr); }

  // Records an operation result. The closure receives the gradient of this
  // node and must accumulate into its inputs via accumulate().
  Var record(TensorT value, std::initializer_list<Var> inputs, BackwardFn backward) {
    bool needs_grad = false;
    for (Var v : inputs) needs_grad = needs_grad || node(v).requires_grad;
    return append(std::move(value), needs_grad, needs_grad ? std::move(backward) : nullptr);
  }

  const TensorT& value(Var v) const { return node(v).value; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }

  // Gradient accumulated by backward(); zeros when nothing reached the node.
  TensorT grad(Var v) const {
    const Node& n = node(v);
    return n.grad.empty() && !n.value.empty() ? TensorT(n.value.dims()) : n.grad;
  }

  void accumulate(Var v, const TensorT& g) {
    Node& n = node(v);
    if (!n.requires_grad) return;
    if (!g.same_shape(n.value)) {
      throw ShapeError("gradient shape " + dims_to_string(g.dims()) + " does not match value " +
                       dims_to_string(n.value.dims()));
    }
    if (n.grad.empty()) {
      n.grad = g;
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
    }
  }

  // Seeds d(root)/d(root) = 1 and propagates. The root must be a scalar.
  void backward(Var root) {
    Node& r = node(root);
    if (r.value.size() != 1 || r.value.rank() != 0) {
      throw ContractError("backward: root must be a scalar (all-axes reduction), got dims " +
                          dims_to_string(r.value.dims()));
    }
    if (!r.requires_grad) return;
    accumulate(root, TensorT::scalar(Real(1)));
    for (std::size_t i = root.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.backward || n.grad.empty()) continue;
      n.backward(*this, n.grad);
    }
  }

  void zero_grad() {
    for (Node& n : nodes_) n.grad = TensorT();
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    TensorT value;
    TensorT grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var append(TensorT value, bool requires_grad, BackwardFn backward) {
#ifndef NDEBUG
    if (!value.all_finite()) throw ComputeError("non-finite value recorded on tape");
#endif
    nodes_.push_back({std::move(value), TensorT(), requires_grad, std::move(backward)});
    return Var{nodes_.size() - 1};
  }

  Node& node(Var v) {
    if (v.id >= nodes_.size()) throw ContractError("tape variable out of range");
    return nodes_[v.id];
  }
  const Node& node(Var v) const {
    if (v.id >= nodes_.size()) throw ContractError("tape variable out of range");
    return nodes_[v.id];
  }

  std::vector<Node> nodes_;
};

template <typename Real>
void backward(Tape<Real>& tape, Var loss) {
  tape.backward(loss);
}

// ---- Differentiable operations -------------------------------------------

// HConv: 4D "same" cross-correlation, see ops::conv4d_forward.
template <typename Real>
Var hconv4d(Tape<Real>& tape, Var input, Var weights, Var bias, std::size_t stride = 1);

template <typename Real>
Var lrelu(Tape<Real>& tape, Var x, Real slope);

enum class NormMode { kTrain, kEval };

// Running statistics of one AGBN layer, updated by the training loop.
struct RunningStats {
  std::vector<double> mean;
  std::vector<double> var;
};

struct AgbnOptions {
  NormMode mode = NormMode::kTrain;
  double eps = 1e-5;
  const RunningStats* running = nullptr;  // required in eval mode
  ops::AgbnStats* batch_stats_out = nullptr;  // receives train-mode batch statistics
};

template <typename Real>
Var agbn(Tape<Real>& tape, Var x, Var gamma, Var beta, const AgbnOptions& options);

template <typename Real>
Var add(Tape<Real>& tape, Var a, Var b);

template <typename Real>
Var pixel_shuffle(Tape<Real>& tape, Var x, std::size_t r);

template <typename Real>
Var angular_interp(Tape<Real>& tape, Var x, std::size_t s_out, std::size_t t_out);

// Scalar reductions.
template <typename Real>
Var sum(Tape<Real>& tape, Var x);

enum class Reduction { kSum, kMean };

// sum or mean of (a - b)^2 over every element.
template <typename Real>
Var squared_error(Tape<Real>& tape, Var a, Var b, Reduction reduction);

// sum(x * weights) for a constant weight tensor; turns any op into a scalar
// test functional.
template <typename Real>
Var dot(Tape<Real>& tape, Var x, const Tensor<Real>& weights);

// ca * a + cb * b for same-shaped a and b.
template <typename Real>
Var linear_combination(Tape<Real>& tape, Var a, Real ca, Var b, Real cb);

}  // namespace hrolf::ad
