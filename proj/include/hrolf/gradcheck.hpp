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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hrolf/autodiff.hpp"

namespace hrolf {

struct GradCheckInput {
  std::string name;
  Tensor<double> value;
};

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at worst_index
  double numeric = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  double tolerance = 0.0;
  std::vector<GradCheckEntry> entries;

  bool pass() const;
  double max_rel_error() const;
};

// |a - n| / max(|a|, |n|, floor). The floor keeps round-off in the central
// difference of an exactly-zero gradient from reading as a large error.
double relative_error(double analytic, double numeric, double floor = 1e-8);

// Builds a scalar on the given tape from the bound inputs.
using ScalarClosure = std::function<ad::Var(ad::Tape<double>&, std::span<const ad::Var>)>;

// Compares reverse-mode gradients of every input element against central
// finite differences (f(x + h) - f(x - h)) / 2h.
GradCheckReport grad_check(const ScalarClosure& fn, const std::vector<GradCheckInput>& inputs,
                           double tolerance, double step = 1e-3, double floor = 1e-8);

}  // namespace hrolf
