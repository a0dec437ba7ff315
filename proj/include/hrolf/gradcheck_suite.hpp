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

// Finite-difference checks of every differentiable operation and of a tiny
// end-to-end model, shared by the CLI, the tests and the acceptance runner.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hrolf/gradcheck.hpp"

namespace hrolf {

struct GradCheckCase {
  std::string name;
  GradCheckReport report;
  double seconds = 0.0;
};

inline constexpr double kGradCheckTolerance = 1e-4;
inline constexpr double kGradCheckStep = 1e-5;
inline constexpr double kGradCheckFloor = 1e-4;

std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed, double tolerance = kGradCheckTolerance,
                                               double step = kGradCheckStep);

// One row per case: name, max relative error, PASS/FAIL.
std::string format_gradcheck_table(const std::vector<GradCheckCase>& cases);

}  // namespace hrolf
