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

// HROC checkpoint files, little-endian:
//
//   "HROC"  u32 version
//   string  model config ("key=value" lines)
//   u8      has_train_state
//     string  train config
//     u64     epoch
//     u64     step
//   u32     record count
//   records: u32 name length, name bytes, u32 rank, u32 dims[rank],
//            f32 payload
//
// Strings are u32 length + bytes. Model parameters use their layer names,
// momentum buffers "velocity/<name>", feature-net weights "phi.stage{k}.*".

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "hrolf/train.hpp"

namespace hrolf {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainProgress {
  TrainConfig config;
  std::size_t epoch = 0;
  std::size_t step = 0;
};

struct Checkpoint {
  ModelParams<float> params;
  std::optional<TrainProgress> train;
  std::map<std::string, Tensor<float>> velocity;
  std::map<std::string, Tensor<float>> features;  // phi records, when stored
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
// Throws FormatError on bad magic, unsupported version, truncation, unknown
// or missing records, or shape mismatches.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& source);

// Atomic: writes a temporary file and renames it over path.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(const TrainState& state, const TrainConfig& cfg);
// Restores params, momentum, phi and the step counter.
TrainState restore_train_state(const Checkpoint& ckpt);

}  // namespace hrolf
