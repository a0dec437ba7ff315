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

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "hrolf/binary_io.hpp"
#include "hrolf/checkpoint.hpp"
#include "hrolf/lf_io.hpp"
#include "hrolf/manifest.hpp"
#include "oracles.hpp"

using namespace hrolf;
using namespace hrolf::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result hrolf_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hrolf");
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  Result r;
  r.code = cli::run(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string bytes(const fs::path& p) {
  const auto b = read_file_bytes(p);
  return std::string(b.begin(), b.end());
}

const std::vector<std::string> kTinyModel = {
    "--set", "model.d=1",    "--set", "model.n=1",    "--set", "model.channels=2", "--set", "model.in_s=3",
    "--set", "model.in_t=3", "--set", "model.out_s=3", "--set", "model.out_t=3",   "--set", "model.scale=2"};

std::vector<std::string> train_args(const fs::path& data, const fs::path& out, std::size_t steps) {
  std::vector<std::string> a = {"train", "--data", data.string(), "--out", out.string(), "--seed", "5",
                                "--max-steps", std::to_string(steps), "--set", "train.patch=8",
                                "--set", "train.steps_per_epoch=3", "--set", "train.lr0=1e-3"};
  a.insert(a.end(), kTinyModel.begin(), kTinyModel.end());
  return a;
}

void small_scene(const fs::path& out, std::size_t views = 3, std::size_t extent = 16) {
  const std::string v = std::to_string(views), e = std::to_string(extent);
  REQUIRE(hrolf_cli({"synth", "--out", out.string(), "--seed", "2", "--set", "synth.s=" + v, "--set",
                     "synth.t=" + v, "--set", "synth.x=" + e, "--set", "synth.y=" + e})
              .code == 0);
}

}  // namespace

TEST_CASE("synth defaults and determinism") {
  TempDir dir("cli");
  REQUIRE(hrolf_cli({"synth", "--out", (dir / "a.lf4").string(), "--seed", "9"}).code == 0);
  REQUIRE(hrolf_cli({"synth", "--out", (dir / "b.lf4").string(), "--seed", "9"}).code == 0);
  const LightField a = load_lightfield(dir / "a.lf4");
  CHECK(a.shape() == LightFieldShape{9, 9, 64, 64, 1});
  CHECK(bytes(dir / "a.lf4") == bytes(dir / "b.lf4"));
  CHECK(fs::exists(dir / "a.disparity.lf4"));
  const RunManifest m = parse_run_manifest(bytes(manifest_path(dir / "a.lf4")));
  CHECK(m.command == "synth");
  CHECK(m.seed == 9);
  CHECK(m.version == kVersionString);
}

TEST_CASE("synth writes view directories") {
  TempDir dir("cli");
  small_scene(dir / "views");
  CHECK(fs::exists(dir / "views" / "manifest.txt"));
  CHECK(load_lightfield(dir / "views").shape() == LightFieldShape{3, 3, 16, 16, 1});
  CHECK_FALSE(fs::exists(dir / "views.partial"));
}

TEST_CASE("degrade shapes, angular subset and determinism") {
  TempDir dir("cli");
  small_scene(dir / "hr.lf4", 9, 16);
  REQUIRE(hrolf_cli({"degrade", "--in", (dir / "hr.lf4").string(), "--out", (dir / "lr.lf4").string()}).code == 0);
  CHECK(load_lightfield(dir / "lr.lf4").shape() == LightFieldShape{9, 9, 8, 8, 1});

  REQUIRE(hrolf_cli({"degrade", "--in", (dir / "hr.lf4").string(), "--out", (dir / "a3.lf4").string(), "--scale",
                     "1", "--noise-std", "0", "--angular", "3x3"})
              .code == 0);
  const LightField hr = load_lightfield(dir / "hr.lf4");
  const LightField a3 = load_lightfield(dir / "a3.lf4");
  REQUIRE(a3.shape() == LightFieldShape{3, 3, 16, 16, 1});

  REQUIRE(hrolf_cli({"degrade", "--in", (dir / "hr.lf4").string(), "--out", (dir / "n0.lf4").string(), "--noise-std",
                     "0", "--scale", "1", "--sigma", "0.3", "--blur-size", "1"})
              .code == 0);
  const LightField n0 = load_lightfield(dir / "n0.lf4");
  CHECK(n0 == hr);
  // A 1x1 kernel is the identity, so the angular subset is plain view selection.
  REQUIRE(hrolf_cli({"degrade", "--in", (dir / "hr.lf4").string(), "--out", (dir / "sel.lf4").string(), "--scale",
                     "1", "--noise-std", "0", "--blur-size", "1", "--angular", "3x3"})
              .code == 0);
  const LightField sel = load_lightfield(dir / "sel.lf4");
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t t = 0; t < 3; ++t) CHECK(sel.view(s, t).values == hr.view(4 * s, 4 * t).values);

  REQUIRE(hrolf_cli({"degrade", "--in", (dir / "hr.lf4").string(), "--out", (dir / "r1.lf4").string()}).code == 0);
  CHECK(bytes(dir / "lr.lf4") == bytes(dir / "r1.lf4"));
}

TEST_CASE("train, resume, sr and eval") {
  TempDir dir("cli");
  fs::create_directories(dir / "data");
  small_scene(dir / "data" / "scene.lf4");

  Result r = hrolf_cli(train_args(dir / "data", dir / "full.ckpt", 6));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const Checkpoint full = load_checkpoint(dir / "full.ckpt");
  REQUIRE(full.train);
  CHECK(full.train->step == 6);
  CHECK(fs::exists(manifest_path(dir / "full.ckpt")));

  REQUIRE(hrolf_cli(train_args(dir / "data", dir / "part.ckpt", 3)).code == 0);
  auto resume = train_args(dir / "data", dir / "part.ckpt", 6);
  resume.insert(resume.begin() + 1, {"--resume", (dir / "part.ckpt").string()});
  r = hrolf_cli(resume);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(bytes(dir / "part.ckpt") == bytes(dir / "full.ckpt"));
  CHECK(bytes(dir / "part.ckpt.history.txt") == bytes(dir / "full.ckpt.history.txt"));

  auto bad = train_args(dir / "data", dir / "bad.ckpt", 2);
  bad.insert(bad.end(), {"--set", "model.n=3"});
  CHECK(hrolf_cli(bad).code == 2);
  CHECK_FALSE(fs::exists(dir / "bad.ckpt"));

  REQUIRE(hrolf_cli({"degrade", "--in", (dir / "data" / "scene.lf4").string(), "--out", (dir / "lr.lf4").string()})
              .code == 0);
  for (const char* name : {"sr1.lf4", "sr2.lf4"}) {
    r = hrolf_cli({"sr", "--in", (dir / "lr.lf4").string(), "--checkpoint", (dir / "full.ckpt").string(), "--out",
                   (dir / name).string(), "--primary-out", (dir / ("p_" + std::string(name))).string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
  }
  CHECK(load_lightfield(dir / "sr1.lf4").shape() == LightFieldShape{3, 3, 16, 16, 1});
  CHECK(load_lightfield(dir / "p_sr1.lf4").shape() == LightFieldShape{3, 3, 16, 16, 1});
  CHECK(bytes(dir / "sr1.lf4") == bytes(dir / "sr2.lf4"));

  r = hrolf_cli({"eval", "--pred", (dir / "sr1.lf4").string(), "--truth", (dir / "sr1.lf4").string(), "--format",
                 "kv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("mean.psnr=inf") != std::string::npos);
  CHECK(r.out.find("mean.ssim=1.000000\n") != std::string::npos);
  CHECK(r.out.find("views=9") != std::string::npos);
}

TEST_CASE("baseline of a constant field is constant") {
  TempDir dir("cli");
  save_lightfield(LightField({2, 2, 5, 4, 1}, 77.0), dir / "c.lf4", LightFieldFormat::kLf4);
  for (const char* method : {"bicubic", "linear"}) {
    REQUIRE(hrolf_cli({"baseline", "--in", (dir / "c.lf4").string(), "--out", (dir / "u.lf4").string(), "--scale",
                       "3", "--method", method, "--angular", "3x3"})
                .code == 0);
    const LightField u = load_lightfield(dir / "u.lf4");
    CHECK(u.shape() == LightFieldShape{3, 3, 15, 12, 1});
    for (double v : u.samples()) CHECK(std::abs(v - 77.0) < 1e-4);
  }
}

TEST_CASE("epi and view dumps") {
  TempDir dir("cli");
  small_scene(dir / "s.lf4", 5, 12);
  REQUIRE(hrolf_cli({"epi", "--in", (dir / "s.lf4").string(), "--out", (dir / "h.pgm").string()}).code == 0);
  CHECK(bytes(dir / "h.pgm").starts_with("P5\n12 5\n255\n"));
  REQUIRE(hrolf_cli({"epi", "--in", (dir / "s.lf4").string(), "--out", (dir / "v.png").string(), "--orientation",
                     "v"})
              .code == 0);
  CHECK(bytes(dir / "v.png").starts_with("\x89PNG"));
  REQUIRE(hrolf_cli({"epi", "--in", (dir / "s.lf4").string(), "--out", (dir / "c.pgm").string(), "--view", "2,2"})
              .code == 0);
  CHECK(bytes(dir / "c.pgm").starts_with("P5\n12 12\n255\n"));
}

TEST_CASE("gradcheck subcommand prints a table") {
  const Result r = hrolf_cli({"gradcheck", "--seed", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("model_end_to_end") != std::string::npos);
  CHECK(r.out.find("all passed") != std::string::npos);
}

TEST_CASE("exit codes and no partial outputs") {
  TempDir dir("cli");
  CHECK(hrolf_cli({}).code == 2);
  CHECK(hrolf_cli({"synth"}).code == 2);
  CHECK(hrolf_cli({"nope"}).code == 2);
  CHECK(hrolf_cli({"degrade", "--in", (dir / "missing.lf4").string(), "--out", (dir / "o.lf4").string()}).code == 5);
  CHECK_FALSE(fs::exists(dir / "o.lf4"));

  const std::vector<std::uint8_t> junk{'n', 'o', 'p', 'e'};
  write_file_atomic(dir / "junk.lf4", junk);
  CHECK(hrolf_cli({"degrade", "--in", (dir / "junk.lf4").string(), "--out", (dir / "o.lf4").string()}).code == 3);
  CHECK_FALSE(fs::exists(dir / "o.lf4"));

  small_scene(dir / "s.lf4", 3, 9);
  const Result r = hrolf_cli({"degrade", "--in", (dir / "s.lf4").string(), "--out", (dir / "o.lf4").string()});
  CHECK(r.code == 2);
  CHECK(r.err.starts_with("hrolf: error:"));
  CHECK_FALSE(fs::exists(dir / "o.lf4"));
  CHECK(hrolf_cli({"synth", "--out", (dir / "x.lf4").string(), "--set", "synth.s=0"}).code == 2);
  CHECK(hrolf_cli({"synth", "--out", (dir / "x.lf4").string(), "--set", "nodot"}).code == 2);
  CHECK_FALSE(fs::exists(dir / "x.lf4"));
  CHECK(hrolf_cli({"--version"}).code == 0);
}
