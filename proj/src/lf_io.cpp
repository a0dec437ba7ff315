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

#include "hrolf/lf_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "hrolf/binary_io.hpp"
#include "hrolf/errors.hpp"

namespace hrolf {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kLf4Magic = {'L', 'F', '4', '\0'};

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::string view_stem(std::size_t s, std::size_t t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "view_%02zu_%02zu", s, t);
  return buf;
}

LightField load_lf4(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  ByteReader in(bytes, path.string());
  std::array<char, 4> magic{};
  in.read_bytes(std::span(reinterpret_cast<std::uint8_t*>(magic.data()), magic.size()), "magic");
  if (magic != kLf4Magic) throw FormatError(path.string() + ": bad magic (expected \"LF4\\0\")");
  const std::uint32_t version = in.u32("version");
  if (version != kLf4Version) {
    throw FormatError(path.string() + ": unsupported version " + std::to_string(version) +
                      " (expected " + std::to_string(kLf4Version) + ")");
  }
  LightFieldShape shape;
  shape.s = in.u32("S");
  shape.t = in.u32("T");
  shape.x = in.u32("X");
  shape.y = in.u32("Y");
  shape.c = in.u32("C");
  const std::uint8_t dtype = in.u8("dtype");
  if (shape.s == 0 || shape.t == 0 || shape.x == 0 || shape.y == 0) {
    throw FormatError(path.string() + ": zero extent in header (" + to_string(shape) + ")");
  }
  if (shape.c != 1 && shape.c != 3) {
    throw FormatError(path.string() + ": field C must be 1 or 3, got " + std::to_string(shape.c));
  }
  if (dtype > 1) throw FormatError(path.string() + ": field dtype has unknown value " +
                                   std::to_string(dtype));
  const std::size_t n = shape.size();
  const std::size_t width = dtype == 0 ? 4 : 1;
  if (in.remaining() < n * width) {
    throw FormatError(path.string() + ": truncated payload, expected " + std::to_string(n * width) +
                      " bytes, found " + std::to_string(in.remaining()));
  }
  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i] = dtype == 0 ? static_cast<double>(in.f32("payload")) : in.u8("payload");
  }
  if (in.remaining() != 0) {
    throw FormatError(path.string() + ": " + std::to_string(in.remaining()) +
                      " trailing bytes after payload");
  }
  try {
    return LightField(shape, std::move(samples));
  } catch (const ContractError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_lf4(const LightField& lf, const fs::path& path, SampleType dtype) {
  ByteWriter out;
  out.bytes(std::span(reinterpret_cast<const std::uint8_t*>(kLf4Magic.data()), kLf4Magic.size()));
  out.u32(kLf4Version);
  const auto& sh = lf.shape();
  for (std::size_t v : {sh.s, sh.t, sh.x, sh.y, sh.c}) out.u32(static_cast<std::uint32_t>(v));
  out.u8(static_cast<std::uint8_t>(dtype));
  for (double v : lf.samples()) {
    if (dtype == SampleType::kF32) {
      out.f32(static_cast<float>(v));
    } else {
      out.u8(to_u8(v));
    }
  }
  write_file_atomic(path, out.buffer());
}

std::size_t parse_manifest_value(const std::string& line, const fs::path& path) {
  const auto eq = line.find('=');
  try {
    return static_cast<std::size_t>(std::stoul(line.substr(eq + 1)));
  } catch (const std::exception&) {
    throw FormatError(path.string() + ": malformed manifest line \"" + line + "\"");
  }
}

LightField load_view_directory(const fs::path& dir) {
  const fs::path manifest = dir / "manifest.txt";
  std::ifstream in(manifest);
  if (!in) throw FormatError(dir.string() + ": missing manifest.txt");
  LightFieldShape shape;
  std::string line;
  while (std::getline(in, line)) {
    line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char ch) { return std::isspace(ch); }),
               line.end());
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("S=", 0) == 0) {
      shape.s = parse_manifest_value(line, manifest);
    } else if (line.rfind("T=", 0) == 0) {
      shape.t = parse_manifest_value(line, manifest);
    } else if (line.rfind("C=", 0) == 0) {
      shape.c = parse_manifest_value(line, manifest);
    }
  }
  if (shape.s == 0) throw FormatError(manifest.string() + ": field S missing or zero");
  if (shape.t == 0) throw FormatError(manifest.string() + ": field T missing or zero");
  if (shape.c != 1 && shape.c != 3) throw FormatError(manifest.string() + ": field C must be 1 or 3");

  LightField lf;
  for (std::size_t s = 0; s < shape.s; ++s) {
    for (std::size_t t = 0; t < shape.t; ++t) {
      fs::path file;
      for (const char* ext : {".png", ".pgm", ".ppm"}) {
        const fs::path candidate = dir / (view_stem(s, t) + ext);
        if (fs::exists(candidate)) {
          file = candidate;
          break;
        }
      }
      if (file.empty()) throw FormatError(dir.string() + ": missing view " + view_stem(s, t));
      const Image image = read_image(file);
      if (image.channels != shape.c) {
        throw FormatError(file.string() + ": channel count " + std::to_string(image.channels) +
                          " disagrees with manifest C=" + std::to_string(shape.c));
      }
      if (lf.empty()) {
        shape.x = image.width;
        shape.y = image.height;
        lf = LightField(shape);
      } else if (image.width != shape.x || image.height != shape.y) {
        throw FormatError(file.string() + ": inconsistent view size " + std::to_string(image.width) +
                          "x" + std::to_string(image.height) + ", expected " +
                          std::to_string(shape.x) + "x" + std::to_string(shape.y));
      }
      lf.set_view(s, t, image);
    }
  }
  return lf;
}

void save_view_directory(const LightField& lf, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string() + ": " + ec.message());
  const auto& sh = lf.shape();
  for (std::size_t s = 0; s < sh.s; ++s) {
    for (std::size_t t = 0; t < sh.t; ++t) {
      write_image(lf.view(s, t), dir / (view_stem(s, t) + ".png"));
    }
  }
  std::ostringstream manifest;
  manifest << "S=" << sh.s << "\nT=" << sh.t << "\nC=" << sh.c << "\n";
  const std::string text = manifest.str();
  write_file_atomic(dir / "manifest.txt",
                    std::vector<std::uint8_t>(text.begin(), text.end()));
}

// Binary PGM (P5) / PPM (P6), maxval 255.
Image read_pnm(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  std::size_t pos = 0;
  auto next_token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string token;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) token.push_back(static_cast<char>(bytes[pos++]));
    return token;
  };
  const std::string magic = next_token();
  if (magic != "P5" && magic != "P6") throw FormatError(path.string() + ": not a binary PGM/PPM");
  Image image;
  image.channels = magic == "P5" ? 1 : 3;
  try {
    image.width = std::stoul(next_token());
    image.height = std::stoul(next_token());
    if (std::stoul(next_token()) != 255) throw FormatError(path.string() + ": maxval must be 255");
  } catch (const std::invalid_argument&) {
    throw FormatError(path.string() + ": malformed PNM header");
  }
  ++pos;  // single whitespace before raster
  const std::size_t n = image.width * image.height * image.channels;
  if (bytes.size() < pos + n) throw FormatError(path.string() + ": truncated raster");
  image.values.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return image;
}

void write_pnm(const Image& image, const fs::path& path) {
  std::ostringstream header;
  header << (image.channels == 1 ? "P5" : "P6") << "\n"
         << image.width << " " << image.height << "\n255\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> bytes(h.begin(), h.end());
  for (double v : image.values) bytes.push_back(to_u8(v));
  write_file_atomic(path, bytes);
}

Image read_png(const fs::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw FormatError(path.string() + ": " + png.message);
  }
  const bool gray = (png.format & PNG_FORMAT_FLAG_COLOR) == 0;
  png.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<std::uint8_t> raster(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, raster.data(), 0, nullptr)) {
    throw FormatError(path.string() + ": " + png.message);
  }
  Image image(png.width, png.height, gray ? 1 : 3);
  std::copy(raster.begin(), raster.end(), image.values.begin());
  return image;
}

void write_png(const Image& image, const fs::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<std::uint8_t> raster(image.values.size());
  std::transform(image.values.begin(), image.values.end(), raster.begin(), to_u8);
  const fs::path tmp = path.string() + ".tmp";
  if (!png_image_write_to_file(&png, tmp.c_str(), 0, raster.data(), 0, nullptr)) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw IoError(path.string() + ": " + png.message);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError(path.string() + ": " + ec.message());
}

}  // namespace

LightFieldFormat detect_format(const fs::path& path) {
  return fs::is_directory(path) ? LightFieldFormat::kViewDirectory : LightFieldFormat::kLf4;
}

LightField load_lightfield(const fs::path& path, LightFieldFormat format) {
  if (!fs::exists(path)) throw IoError(path.string() + ": no such file or directory");
  return format == LightFieldFormat::kLf4 ? load_lf4(path) : load_view_directory(path);
}

void save_lightfield(const LightField& lf, const fs::path& path, LightFieldFormat format,
                     SampleType dtype) {
  validate_shape(lf.shape());
  if (format == LightFieldFormat::kLf4) {
    save_lf4(lf, path, dtype);
  } else {
    save_view_directory(lf, path);
  }
}

Image read_image(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".pgm" || ext == ".ppm") return read_pnm(path);
  return read_png(path);
}

void write_image(const Image& image, const fs::path& path) {
  if (image.channels != 1 && image.channels != 3) {
    throw ContractError("images must have 1 or 3 channels");
  }
  const std::string ext = path.extension().string();
  if (ext == ".pgm" || ext == ".ppm") {
    write_pnm(image, path);
  } else {
    write_png(image, path);
  }
}

}  // namespace hrolf
