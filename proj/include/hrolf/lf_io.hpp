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

#include <cstdint>
#include <filesystem>

#include "hrolf/lightfield.hpp"

namespace hrolf {

// lf4 container (little-endian):
//   "LF4\0" | u32 version=1 | u32 S,T,X,Y,C | u8 dtype | payload (s,t,y,x,c)
// dtype 0 stores f32 samples, dtype 1 stores u8 samples (rounded, clamped).
//
// View directory: manifest.txt with S=, T=, C= lines plus one image per view
// named view_{s:02}_{t:02}.png (or .pgm/.ppm), s being the first angular axis.
enum class LightFieldFormat { kLf4, kViewDirectory };

enum class SampleType : std::uint8_t { kF32 = 0, kU8 = 1 };

inline constexpr std::uint32_t kLf4Version = 1;

// Directories are view directories, everything else is lf4.
LightFieldFormat detect_format(const std::filesystem::path& path);

LightField load_lightfield(const std::filesystem::path& path, LightFieldFormat format);
inline LightField load_lightfield(const std::filesystem::path& path) {
  return load_lightfield(path, detect_format(path));
}

// lf4 writes go through a temporary file and a rename, so a failed save never
// leaves a partial file behind.
void save_lightfield(const LightField& lf, const std::filesystem::path& path,
                     LightFieldFormat format, SampleType dtype = SampleType::kF32);

// 8-bit image files. Values are rounded and clamped to [0, 255] on write.
Image read_image(const std::filesystem::path& path);
void write_image(const Image& image, const std::filesystem::path& path);

}  // namespace hrolf
