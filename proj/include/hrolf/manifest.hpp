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

// Run manifest written next to every command output: enough to rerun the
// command bit-exactly.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hrolf {

inline constexpr const char* kVersionString = "hrolf 0.1.0";

struct RunManifest {
  std::string command;
  std::string config_path;  // empty when no config file was given
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string version = kVersionString;
  // Resolved settings, in insertion order ("model.d", "train.lr0", ...).
  std::vector<std::pair<std::string, std::string>> settings;

  bool operator==(const RunManifest&) const = default;
};

std::string serialize(const RunManifest& m);
RunManifest parse_run_manifest(const std::string& text);

// "<output>.run.txt"
std::filesystem::path manifest_path(const std::filesystem::path& output);
void write_manifest(const std::filesystem::path& output, const RunManifest& m);

}  // namespace hrolf
