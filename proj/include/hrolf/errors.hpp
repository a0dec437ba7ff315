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

#include <stdexcept>
#include <string>

namespace hrolf {

// Error categories double as CLI exit codes.
enum class ErrorCategory : int {
  kConfig = 2,
  kFormat = 3,
  kCompute = 4,
  kIo = 5,
  kShape = 6,
  kRange = 7,
  kContract = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

#define HROLF_DEFINE_ERROR(Name, Category)                 \
  class Name : public Error {                              \
   public:                                                 \
    explicit Name(const std::string& what)                 \
        : Error(ErrorCategory::Category, what) {}          \
  };

HROLF_DEFINE_ERROR(ConfigError, kConfig)
HROLF_DEFINE_ERROR(FormatError, kFormat)
HROLF_DEFINE_ERROR(ComputeError, kCompute)
HROLF_DEFINE_ERROR(IoError, kIo)
HROLF_DEFINE_ERROR(ShapeError, kShape)
HROLF_DEFINE_ERROR(RangeError, kRange)
HROLF_DEFINE_ERROR(ContractError, kContract)

#undef HROLF_DEFINE_ERROR

}  // namespace hrolf
