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

#include "hrolf/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace hrolf {

bool GradCheckReport::pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const GradCheckEntry& e) { return e.pass; });
}

double GradCheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_rel_error);
  return worst;
}

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

namespace {

double evaluate(const ScalarClosure& fn, const std::vector<Tensor<double>>& values) {
  ad::Tape<double> tape;
  std::vector<ad::Var> vars;
  vars.reserve(values.size());
  for (const auto& v : values) vars.push_back(tape.constant(v));
  return tape.value(fn(tape, vars)).item();
}

}  // namespace

GradCheckReport grad_check(const ScalarClosure& fn, const std::vector<GradCheckInput>& inputs,
                           double tolerance, double step, double floor) {
  ad::Tape<double> tape;
  std::vector<ad::Var> vars;
  for (const auto& in : inputs) vars.push_back(tape.parameter(in.value));
  tape.backward(fn(tape, vars));

  std::vector<Tensor<double>> values;
  for (const auto& in : inputs) values.push_back(in.value);

  GradCheckReport report;
  report.tolerance = tolerance;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor<double> analytic = tape.grad(vars[k]);
    GradCheckEntry entry;
    entry.name = inputs[k].name;
    for (std::size_t i = 0; i < values[k].size(); ++i) {
      const double original = values[k][i];
      values[k][i] = original + step;
      const double plus = evaluate(fn, values);
      values[k][i] = original - step;
      const double minus = evaluate(fn, values);
      values[k][i] = original;
      const double numeric = (plus - minus) / (2.0 * step);
      const double err = relative_error(analytic[i], numeric, floor);
      if (err > entry.max_rel_error || i == 0) {
        entry.max_rel_error = std::max(entry.max_rel_error, err);
        entry.worst_index = i;
        entry.analytic = analytic[i];
        entry.numeric = numeric;
      }
    }
    entry.pass = entry.max_rel_error <= tolerance;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace hrolf
