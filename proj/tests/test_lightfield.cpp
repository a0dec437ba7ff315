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

#include <doctest.h>

#include <cstring>
#include <fstream>

#include "hrolf/binary_io.hpp"
#include "hrolf/errors.hpp"
#include "hrolf/lf_io.hpp"
#include "oracles.hpp"

using namespace hrolf;
using hrolf::testing::Gen;
using hrolf::testing::TempDir;

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::vector<std::uint8_t> lf4_header(std::uint32_t s, std::uint32_t t, std::uint32_t x, std::uint32_t y,
                                     std::uint32_t c, std::uint8_t dtype) {
  std::vector<std::uint8_t> b{'L', 'F', '4', 0};
  put_u32(b, 1);
  for (std::uint32_t v : {s, t, x, y, c}) put_u32(b, v);
  b.push_back(dtype);
  return b;
}

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

}  // namespace

TEST_CASE("hand-built minimal lf4 loads as one 1x1 view") {
  TempDir dir("lf");
  auto bytes = lf4_header(1, 1, 1, 1, 1, 0);
  const float seven = 7.0f;
  std::uint8_t raw[4];
  std::memcpy(raw, &seven, 4);
  bytes.insert(bytes.end(), raw, raw + 4);
  write_bytes(dir / "one.lf4", bytes);
  const LightField lf = load_lightfield(dir / "one.lf4");
  CHECK(lf.shape() == LightFieldShape{1, 1, 1, 1, 1});
  CHECK(lf.at(0, 0, 0, 0) == 7.0);
}

TEST_CASE("lf4 payload order is s, t, y, x, c") {
  TempDir dir("lf");
  LightField lf(LightFieldShape{1, 2, 3, 2, 1});
  double v = 0;
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t x = 0; x < 3; ++x) lf.at(0, t, x, y) = v++;
  save_lightfield(lf, dir / "o.lf4", LightFieldFormat::kLf4);
  const auto bytes = read_file_bytes(dir / "o.lf4");
  REQUIRE(bytes.size() == 4 + 4 + 20 + 1 + 12 * 4);
  for (std::size_t i = 0; i < 12; ++i) {
    float f;
    std::memcpy(&f, bytes.data() + 29 + 4 * i, 4);
    CHECK(f == static_cast<float>(i));
  }
}

TEST_CASE("random 3x3x8x8x1 field round-trips bit-exactly through lf4") {
  TempDir dir("lf");
  Gen g(11);
  LightField lf = testing::random_field(g, {3, 3, 8, 8, 1});
  for (double& v : lf.samples()) v = static_cast<float>(v);  // f32 payload
  save_lightfield(lf, dir / "r.lf4", LightFieldFormat::kLf4);
  CHECK(load_lightfield(dir / "r.lf4") == lf);
}

TEST_CASE("u8 payload rounds and clamps") {
  TempDir dir("lf");
  LightField lf(LightFieldShape{1, 1, 4, 1, 1}, 0.0);
  lf.at(0, 0, 0, 0) = -3.0;
  lf.at(0, 0, 1, 0) = 12.4;
  lf.at(0, 0, 2, 0) = 12.6;
  lf.at(0, 0, 3, 0) = 300.0;
  save_lightfield(lf, dir / "u.lf4", LightFieldFormat::kLf4, SampleType::kU8);
  const LightField back = load_lightfield(dir / "u.lf4");
  CHECK(back.at(0, 0, 0, 0) == 0.0);
  CHECK(back.at(0, 0, 1, 0) == 12.0);
  CHECK(back.at(0, 0, 2, 0) == 13.0);
  CHECK(back.at(0, 0, 3, 0) == 255.0);
}

TEST_CASE("view directory round trip with 3 interleaved channels") {
  TempDir dir("lf");
  Gen g(5);
  LightField lf = testing::random_field(g, {2, 3, 5, 4, 3});
  for (double& v : lf.samples()) v = std::round(v);
  save_lightfield(lf, dir / "views", LightFieldFormat::kViewDirectory, SampleType::kU8);
  CHECK(std::filesystem::exists(dir / "views" / "view_01_02.png"));
  CHECK(detect_format(dir / "views") == LightFieldFormat::kViewDirectory);
  CHECK(load_lightfield(dir / "views") == lf);
}

TEST_CASE("directory of nine PNG views loads as 3x3") {
  TempDir dir("lf");
  const auto d = dir / "nine";
  std::filesystem::create_directories(d);
  for (int s = 0; s < 3; ++s)
    for (int t = 0; t < 3; ++t) {
      Image im(4, 2, 1, 10.0 * s + t);
      char name[32];
      std::snprintf(name, sizeof name, "view_%02d_%02d.png", s, t);
      write_image(im, d / name);
    }
  std::ofstream(d / "manifest.txt") << "S=3\nT=3\nC=1\n";
  const LightField lf = load_lightfield(d);
  CHECK(lf.shape() == LightFieldShape{3, 3, 4, 2, 1});
  CHECK(lf.at(2, 1, 3, 1) == 21.0);
}

TEST_CASE("format errors name the problem") {
  TempDir dir("lf");
  SUBCASE("bad magic") {
    auto b = lf4_header(1, 1, 1, 1, 1, 0);
    b[0] = 'X';
    b.resize(b.size() + 4);
    write_bytes(dir / "m.lf4", b);
    CHECK_THROWS_AS(load_lightfield(dir / "m.lf4"), FormatError);
  }
  SUBCASE("truncated payload") {
    auto b = lf4_header(2, 2, 4, 4, 1, 0);
    b.resize(b.size() + 10);
    write_bytes(dir / "t.lf4", b);
    CHECK_THROWS_WITH_AS(load_lightfield(dir / "t.lf4"), doctest::Contains("truncated"), FormatError);
  }
  SUBCASE("bad dtype") {
    auto b = lf4_header(1, 1, 1, 1, 1, 9);
    b.resize(b.size() + 4);
    write_bytes(dir / "d.lf4", b);
    CHECK_THROWS_AS(load_lightfield(dir / "d.lf4"), FormatError);
  }
  SUBCASE("inconsistent view sizes") {
    const auto d = dir / "v";
    std::filesystem::create_directories(d);
    write_image(Image(4, 4, 1, 0.0), d / "view_00_00.png");
    write_image(Image(5, 4, 1, 0.0), d / "view_00_01.png");
    std::ofstream(d / "manifest.txt") << "S=1\nT=2\nC=1\n";
    CHECK_THROWS_AS(load_lightfield(d), FormatError);
  }
  SUBCASE("missing manifest") {
    std::filesystem::create_directories(dir / "empty");
    CHECK_THROWS_AS(load_lightfield(dir / "empty"), FormatError);
  }
}

TEST_CASE("saving an empty field is rejected and leaves no file") {
  TempDir dir("lf");
  LightField lf;
  CHECK_THROWS(save_lightfield(lf, dir / "z.lf4", LightFieldFormat::kLf4));
  CHECK_FALSE(std::filesystem::exists(dir / "z.lf4"));
  CHECK_THROWS(LightField(LightFieldShape{0, 1, 1, 1, 1}));
}

TEST_CASE("EPI slices") {
  Gen g(3);
  const LightField lf = testing::random_field(g, {3, 4, 5, 6, 3});
  const Epi h = extract_epi(lf, EpiOrientation::kHorizontal, 2, 1, 1);
  CHECK(h.spatial == 5);
  CHECK(h.angular == 3);
  CHECK(h.at(4, 2) == lf.at(2, 1, 4, 2, 1));
  const Epi v = extract_epi(lf, EpiOrientation::kVertical, 3, 0, 0);
  CHECK(v.spatial == 6);
  CHECK(v.angular == 4);
  CHECK(v.at(5, 3) == lf.at(0, 3, 3, 5, 0));
  CHECK_THROWS_AS(extract_epi(lf, EpiOrientation::kHorizontal, 6, 0), RangeError);
  CHECK_THROWS_AS(extract_epi(lf, EpiOrientation::kHorizontal, 0, 4), RangeError);
  CHECK_THROWS_AS(extract_epi(lf, EpiOrientation::kHorizontal, 0, 0, 3), RangeError);

  const LightField single = testing::random_field(g, {1, 1, 7, 3, 1});
  CHECK(extract_epi(single, EpiOrientation::kHorizontal, 0, 0).values.size() == 7);

  const LightField flat(LightFieldShape{3, 3, 4, 4, 1}, 42.0);
  for (double v2 : extract_epi(flat, EpiOrientation::kVertical, 1, 1).values) CHECK(v2 == 42.0);
}

TEST_CASE("crop_patch") {
  Gen g(9);
  const LightField lf = testing::random_field(g, {2, 2, 128, 128, 1});
  CHECK(crop_patch(lf, 0, 0, 128, 128) == lf);
  const LightField p = crop_patch(lf, 10, 20, 96, 96);
  CHECK(p.shape() == LightFieldShape{2, 2, 96, 96, 1});
  CHECK(p.at(1, 0, 5, 7) == lf.at(1, 0, 15, 27));
  CHECK_THROWS_AS(crop_patch(lf, 40, 0, 96, 96), RangeError);
}

TEST_CASE("luma of gray RGB equals the gray level") {
  LightField rgb(LightFieldShape{1, 1, 2, 2, 3}, 77.0);
  const LightField y = to_luma(rgb);
  CHECK(y.shape().c == 1);
  for (double v : y.samples()) CHECK(v == doctest::Approx(77.0).epsilon(1e-12));
}

TEST_CASE("PGM and PNG images round trip 8-bit values") {
  TempDir dir("img");
  Image im(3, 2, 1);
  for (std::size_t i = 0; i < im.values.size(); ++i) im.values[i] = static_cast<double>(i * 40);
  write_image(im, dir / "a.pgm");
  write_image(im, dir / "a.png");
  CHECK(read_image(dir / "a.pgm").values == im.values);
  CHECK(read_image(dir / "a.png").values == im.values);
}
