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

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hrolf/binary_io.hpp"
#include "hrolf/checkpoint.hpp"
#include "hrolf/degrade.hpp"
#include "hrolf/errors.hpp"
#include "hrolf/gradcheck_suite.hpp"
#include "hrolf/kv_text.hpp"
#include "hrolf/lf_io.hpp"
#include "hrolf/manifest.hpp"
#include "hrolf/metrics.hpp"
#include "hrolf/model.hpp"
#include "hrolf/resample.hpp"
#include "hrolf/synth.hpp"
#include "hrolf/train.hpp"

namespace hrolf::cli {

namespace fs = std::filesystem;

namespace {

// ---- Settings: INI sections, overridden by flags --------------------------

using Section = std::map<std::string, std::string>;

const std::vector<std::string> kSections{"model", "train", "synth", "degrade"};

struct Settings {
  std::string path;
  std::map<std::string, Section> sections;

  void set(const std::string& section, const std::string& key, const std::string& value) {
    sections[section][key] = value;
  }

  // "section.key=value"
  void set_assignment(const std::string& text) {
    const auto dot = text.find('.');
    const auto eq = text.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot > eq) {
      throw ConfigError("--set expects section.key=value, got '" + text + "'");
    }
    const std::string section = text.substr(0, dot);
    if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
      throw ConfigError("unknown config section '" + section + "'");
    }
    set(section, text.substr(dot + 1, eq - dot - 1), text.substr(eq + 1));
  }

  std::string text(const std::string& section) const {
    std::string out;
    const auto it = sections.find(section);
    if (it == sections.end()) return out;
    for (const auto& [k, v] : it->second) out += k + "=" + v + "\n";
    return out;
  }

  void record(std::vector<std::pair<std::string, std::string>>& out, const std::string& section,
              const std::string& serialized) const {
    std::size_t pos = 0;
    while (pos < serialized.size()) {
      auto end = serialized.find('\n', pos);
      if (end == std::string::npos) end = serialized.size();
      const std::string line = serialized.substr(pos, end - pos);
      pos = end + 1;
      const auto eq = line.find('=');
      if (eq != std::string::npos) out.emplace_back(section + "." + line.substr(0, eq), line.substr(eq + 1));
    }
  }
};

Settings load_settings(const std::string& path) {
  Settings s;
  s.path = path;
  if (path.empty()) return s;
  if (!fs::exists(path)) throw IoError(path + ": config file not found");
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(path + ": key '" + section + "' outside of a section");
    if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
      throw ConfigError(path + ": unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) s.set(section, key, value.data());
  }
  return s;
}

// Parses with the library reader; malformed or unknown keys are config errors
// at this layer.
template <typename Fn>
auto parse_section(const Settings& s, const std::string& section, Fn&& parse) {
  try {
    return parse(s.text(section));
  } catch (const FormatError& e) {
    throw ConfigError(std::string("[") + section + "] " + e.what());
  }
}

ModelConfig model_config(const Settings& s) {
  ModelConfig cfg = parse_section(s, "model", [](const std::string& t) { return parse_model_config(t); });
  validate(cfg);
  return cfg;
}

TrainConfig train_config(const Settings& s) {
  TrainConfig cfg = parse_section(s, "train", [](const std::string& t) { return parse_train_config(t); });
  validate(cfg);
  return cfg;
}

struct SynthSettings {
  SynthConfig config;
  std::uint64_t seed = 1;
  std::string scene = "two_layer";
};

SynthSettings synth_settings(const Settings& s) {
  return parse_section(s, "synth", [](const std::string& text) {
    const KeyValueReader r(text, "synth config");
    SynthSettings out;
    LightFieldShape shape{9, 9, 64, 64, 1};
    double background = 0.5;
    double foreground = 1.5;
    double disparity = 0.0;
    std::string texture = "noise";
    r.get("s", shape.s);
    r.get("t", shape.t);
    r.get("x", shape.x);
    r.get("y", shape.y);
    r.get("c", shape.c);
    r.get("scene", out.scene);
    r.get("background_disparity", background);
    r.get("foreground_disparity", foreground);
    r.get("disparity", disparity);
    r.get("texture", texture);
    r.get("seed", out.seed);
    r.reject_unknown();
    if (out.scene == "two_layer") {
      out.config = two_layer_config(shape, background, foreground);
    } else if (out.scene == "plane") {
      out.config.shape = shape;
      out.config.layers.push_back({.texture_seed = 1, .disparity = disparity, .depth_order = 0, .support = {}});
    } else {
      throw ConfigError("synth: scene must be two_layer or plane, got '" + out.scene + "'");
    }
    if (texture == "noise") {
      out.config.texture = TextureKind::kNoise;
    } else if (texture == "checker") {
      out.config.texture = TextureKind::kChecker;
    } else {
      throw ConfigError("synth: texture must be noise or checker, got '" + texture + "'");
    }
    validate(out.config);
    return out;
  });
}

struct DegradeSettings {
  DegradationConfig config;
  std::string angular;  // "" keeps every view
};

DegradeSettings degrade_settings(const Settings& s) {
  return parse_section(s, "degrade", [](const std::string& text) {
    const KeyValueReader r(text, "degrade config");
    DegradeSettings out;
    r.get("scale", out.config.scale);
    r.get("blur_size", out.config.blur_size);
    r.get("sigma", out.config.sigma);
    r.get("noise_std", out.config.noise_std);
    r.get("noise_seed", out.config.noise_seed);
    r.get("angular", out.angular);
    r.reject_unknown();
    validate(out.config);
    return out;
  });
}

// ---- Output helpers --------------------------------------------------------

LightFieldFormat output_format(const fs::path& path) {
  return path.extension() == ".lf4" ? LightFieldFormat::kLf4 : LightFieldFormat::kViewDirectory;
}

SampleType parse_dtype(const std::string& name) {
  if (name == "f32") return SampleType::kF32;
  if (name == "u8") return SampleType::kU8;
  throw ConfigError("--dtype must be f32 or u8, got '" + name + "'");
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

// lf4 files are written atomically by the library. View directories are
// staged in a sibling directory and renamed into place.
void save_output(const LightField& lf, const fs::path& path, SampleType dtype) {
  ensure_parent(path);
  if (output_format(path) == LightFieldFormat::kLf4) {
    save_lightfield(lf, path, LightFieldFormat::kLf4, dtype);
    return;
  }
  fs::path stage = path;
  stage += ".partial";
  std::error_code ec;
  fs::remove_all(stage, ec);
  try {
    save_lightfield(lf, stage, LightFieldFormat::kViewDirectory, dtype);
    fs::remove_all(path);
    fs::rename(stage, path);
  } catch (...) {
    fs::remove_all(stage, ec);
    throw;
  }
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                        text.size()));
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::pair<std::size_t, std::size_t> parse_pair(const std::string& text, char sep, const std::string& what) {
  const auto pos = text.find(sep);
  std::size_t a = 0;
  std::size_t b = 0;
  const KeyValueReader r("a=" + text.substr(0, pos == std::string::npos ? 0 : pos) + "\nb=" +
                             (pos == std::string::npos ? std::string() : text.substr(pos + 1)),
                         what);
  try {
    if (pos == std::string::npos) throw FormatError("");
    r.get("a", a);
    r.get("b", b);
  } catch (const FormatError&) {
    throw ConfigError(what + ": expected <a>" + std::string(1, sep) + "<b>, got '" + text + "'");
  }
  return {a, b};
}

// ---- Subcommands -----------------------------------------------------------

RunManifest manifest(std::string command, std::string config, std::uint64_t seed,
                     std::vector<std::string> inputs, std::vector<std::string> outputs) {
  RunManifest m;
  m.command = std::move(command);
  m.config_path = std::move(config);
  m.seed = seed;
  m.inputs = std::move(inputs);
  m.outputs = std::move(outputs);
  return m;
}

struct Common {
  std::string config;
  std::vector<std::string> sets;

  Settings settings() const {
    Settings s = load_settings(config);
    for (const auto& a : sets) s.set_assignment(a);
    return s;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "INI file with [model] [train] [synth] [degrade] sections");
  app->add_option("--set", c.sets, "override one setting: section.key=value (repeatable)");
}

struct SynthArgs {
  Common common;
  std::string out;
  std::string dtype = "f32";
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a) {
  Settings s = a.common.settings();
  if (a.seed) s.set("synth", "seed", std::to_string(*a.seed));
  const SynthSettings ss = synth_settings(s);
  const SampleType dtype = parse_dtype(a.dtype);

  const SynthResult result = synth_scene(ss.config, ss.seed);
  const fs::path out(a.out);
  fs::path sidecar = out;
  sidecar.replace_extension(".disparity.lf4");
  LightField disparity(LightFieldShape{1, 1, result.disparity_map.width, result.disparity_map.height, 1});
  disparity.set_view(0, 0, result.disparity_map);

  save_output(result.field, out, dtype);
  save_lightfield(disparity, sidecar, LightFieldFormat::kLf4, SampleType::kF32);

  RunManifest m = manifest("synth", s.path, ss.seed, {}, {out.string(), sidecar.string()});
  s.record(m.settings, "synth", s.text("synth"));
  write_manifest(out, m);
  std::cout << "wrote " << out.string() << " (" << to_string(result.field.shape()) << ")\n";
  return 0;
}

struct DegradeArgs {
  Common common;
  std::string in;
  std::string out;
  std::string dtype = "f32";
  std::optional<std::size_t> scale;
  std::optional<double> noise_std;
  std::optional<double> sigma;
  std::optional<std::size_t> blur_size;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> angular;
};

int cmd_degrade(const DegradeArgs& a) {
  Settings s = a.common.settings();
  if (a.scale) s.set("degrade", "scale", std::to_string(*a.scale));
  if (a.noise_std) s.set("degrade", "noise_std", format_real(*a.noise_std));
  if (a.sigma) s.set("degrade", "sigma", format_real(*a.sigma));
  if (a.blur_size) s.set("degrade", "blur_size", std::to_string(*a.blur_size));
  if (a.seed) s.set("degrade", "noise_seed", std::to_string(*a.seed));
  if (a.angular) s.set("degrade", "angular", *a.angular);
  const DegradeSettings ds = degrade_settings(s);
  const SampleType dtype = parse_dtype(a.dtype);

  LightField lf = load_lightfield(a.in);
  if (!ds.angular.empty()) lf = decimate_angular(lf, angular_task(lf.shape(), ds.angular));
  const LightField low = degrade_spatial(lf, ds.config);
  save_output(low, a.out, dtype);

  RunManifest m = manifest("degrade", s.path, ds.config.noise_seed, {a.in}, {a.out});
  s.record(m.settings, "degrade", s.text("degrade"));
  write_manifest(a.out, m);
  std::cout << "wrote " << a.out << " (" << to_string(low.shape()) << ")\n";
  return 0;
}


struct TrainArgs {
  Common common;
  std::string data;
  std::string out;
  std::string resume;
  std::string history;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_steps;
  std::size_t log_every = 0;
};

std::vector<TrainSample> load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir.string() + ": dataset directory not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const fs::path& p = entry.path();
    const std::string name = p.filename().string();
    const bool sidecar = name.size() > 14 && name.ends_with(".disparity.lf4");
    if (entry.is_regular_file() && p.extension() == ".lf4" && !sidecar) files.push_back(p);
    if (entry.is_directory() && fs::exists(p / "manifest.txt")) files.push_back(p);
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError(dir.string() + ": no light fields (.lf4 or view directories)");
  std::vector<TrainSample> data;
  for (const auto& f : files) data.push_back({load_lightfield(f), std::nullopt});
  return data;
}

// History lines of an earlier run, up to (excluding) step `until`.
std::string history_prefix(const fs::path& path, std::size_t until) {
  std::string out;
  if (!fs::exists(path)) return out;
  const std::string text = read_text(path);
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    std::size_t step = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), step);
    if (ec == std::errc() && ptr != line.data() && step < until) out += line + "\n";
  }
  return out;
}

int cmd_train(const TrainArgs& a) {
  Settings s = a.common.settings();
  if (a.seed) {
    s.set("train", "seed", std::to_string(*a.seed));
    s.set("model", "seed", std::to_string(*a.seed));
  }
  if (a.max_steps) s.set("train", "max_steps", std::to_string(*a.max_steps));

  std::optional<Checkpoint> ckpt;
  ModelConfig mcfg;
  TrainConfig tcfg;
  if (!a.resume.empty()) {
    ckpt = load_checkpoint(a.resume);
    if (!ckpt->train) throw ConfigError(a.resume + ": checkpoint carries no training state");
    mcfg = ckpt->params.config();
    if (!s.text("model").empty() && !(model_config(s) == mcfg)) {
      throw ConfigError("model settings differ from the resumed checkpoint");
    }
    const std::string base = serialize(ckpt->train->config);
    tcfg = parse_section(s, "train", [&](const std::string& t) { return parse_train_config(base + t); });
    validate(tcfg);
  } else {
    mcfg = model_config(s);
    tcfg = train_config(s);
  }

  const std::vector<TrainSample> data = load_dataset(a.data);
  validate_dataset(data, tcfg, mcfg);

  TrainState state = ckpt ? restore_train_state(*ckpt) : make_train_state(mcfg, tcfg);
  const fs::path out(a.out);
  fs::path history_path = a.history;
  if (history_path.empty()) {
    history_path = out;
    history_path += ".history.txt";
  }
  std::string history = "step epoch lr loss_r loss_p loss\n";
  if (ckpt) history += history_prefix(history_path, state.step);

  const std::size_t first = state.step;
  const auto records = train_loop(data, tcfg, state, [&](const HistoryRecord& r, const TrainState&) {
    if (a.log_every != 0 && (r.step % a.log_every == 0 || r.step + 1 == total_steps(tcfg))) {
      std::cout << format_history_line(r) << '\n' << std::flush;
    }
  });
  for (const auto& r : records) history += format_history_line(r) + "\n";

  ensure_parent(out);
  save_checkpoint(out, make_checkpoint(state, tcfg));
  write_text(history_path, history);

  RunManifest m = manifest("train", s.path, tcfg.seed, {a.data}, {out.string(), history_path.string()});
  if (!a.resume.empty()) m.inputs.push_back(a.resume);
  s.record(m.settings, "model", serialize(mcfg));
  s.record(m.settings, "train", serialize(tcfg));
  write_manifest(out, m);
  std::cout << "trained steps " << first << ".." << state.step << ", wrote " << out.string() << '\n';
  return 0;
}

struct SrArgs {
  std::string in;
  std::string checkpoint;
  std::string out;
  std::string primary_out;
  std::string dtype = "f32";
};

int cmd_sr(const SrArgs& a) {
  const SampleType dtype = parse_dtype(a.dtype);
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const LightField low = load_lightfield(a.in);
  const SuperResolved sr = model_forward<float>(low, ckpt.params);
  save_output(sr.final_output, a.out, dtype);
  RunManifest m = manifest("sr", "", ckpt.params.config().seed, {a.in, a.checkpoint}, {a.out});
  if (!a.primary_out.empty()) {
    save_output(sr.primary, a.primary_out, dtype);
    m.outputs.push_back(a.primary_out);
  }
  Settings().record(m.settings, "model", serialize(ckpt.params.config()));
  write_manifest(a.out, m);
  std::cout << "wrote " << a.out << " (" << to_string(sr.final_output.shape()) << ")\n";
  return 0;
}

struct EvalArgs {
  std::string pred;
  std::string truth;
  std::string mode = "all";
  std::string input_views;
  std::string format = "text";
  std::string report;
  double peak = 255.0;
  bool rgb = false;
  bool no_ssim = false;
};

int cmd_eval(const EvalArgs& a) {
  if (a.format != "text" && a.format != "kv") throw ConfigError("--format must be text or kv");
  EvalOptions opt;
  opt.mode = parse_eval_mode(a.mode);
  opt.peak = a.peak;
  opt.luma = !a.rgb;
  opt.with_ssim = !a.no_ssim;
  const LightField pred = load_lightfield(a.pred);
  const LightField truth = load_lightfield(a.truth);
  if (!a.input_views.empty()) opt.input_views = angular_task(truth.shape(), a.input_views);
  if (opt.mode == EvalMode::kSynthesizedOnly && !opt.input_views) {
    throw ConfigError("--mode synth needs --input-views");
  }
  const EvalReport report = eval_lf(pred, truth, opt);
  const std::string text = a.format == "kv" ? format_report_kv(report) : format_report_text(report);
  std::cout << text;
  if (!a.report.empty()) {
    write_text(a.report, text);
    RunManifest m = manifest("eval", "", 0, {a.pred, a.truth}, {a.report});
    m.settings = {{"eval.mode", a.mode}, {"eval.input_views", a.input_views}, {"eval.peak", format_real(a.peak)},
                  {"eval.luma", a.rgb ? "false" : "true"}, {"eval.ssim", a.no_ssim ? "false" : "true"}};
    write_manifest(a.report, m);
  }
  return 0;
}

struct EpiArgs {
  std::string in;
  std::string out;
  std::string view;
  std::string orientation = "h";
  std::optional<std::size_t> spatial;
  std::optional<std::size_t> angular;
  std::size_t channel = 0;
};

int cmd_epi(const EpiArgs& a) {
  const LightField lf = load_lightfield(a.in);
  const LightFieldShape& sh = lf.shape();
  Image image;
  RunManifest m = manifest("epi", "", 0, {a.in}, {a.out});
  if (!a.view.empty()) {
    const auto [vs, vt] = parse_pair(a.view, ',', "--view");
    if (vs >= sh.s || vt >= sh.t) throw RangeError("--view " + a.view + " outside " + to_string(sh));
    image = lf.view(vs, vt);
    m.settings = {{"epi.view", a.view}};
  } else {
    EpiOrientation o;
    std::size_t spatial = 0;
    std::size_t angular = 0;
    if (a.orientation == "h") {
      o = EpiOrientation::kHorizontal;
      spatial = a.spatial.value_or(center_index(sh.y));
      angular = a.angular.value_or(center_index(sh.t));
    } else if (a.orientation == "v") {
      o = EpiOrientation::kVertical;
      spatial = a.spatial.value_or(center_index(sh.x));
      angular = a.angular.value_or(center_index(sh.s));
    } else {
      throw ConfigError("--orientation must be h or v, got '" + a.orientation + "'");
    }
    image = extract_epi(lf, o, spatial, angular, a.channel).to_image();
    m.settings = {{"epi.orientation", a.orientation},
                  {"epi.spatial", std::to_string(spatial)},
                  {"epi.angular", std::to_string(angular)},
                  {"epi.channel", std::to_string(a.channel)}};
  }
  ensure_parent(a.out);
  write_image(image, a.out);
  write_manifest(a.out, m);
  std::cout << "wrote " << a.out << " (" << image.width << "x" << image.height << ")\n";
  return 0;
}

struct BaselineArgs {
  std::string in;
  std::string out;
  std::size_t scale = 2;
  std::string method = "bicubic";
  std::string angular;
  std::string dtype = "f32";
};

int cmd_baseline(const BaselineArgs& a) {
  const SpatialMethod method = parse_spatial_method(a.method);
  if (a.scale == 0) throw ConfigError("--scale must be positive");
  std::optional<std::pair<std::size_t, std::size_t>> ang;
  if (!a.angular.empty()) ang = parse_pair(a.angular, 'x', "--angular");
  const SampleType dtype = parse_dtype(a.dtype);
  LightField lf = upsample_spatial(load_lightfield(a.in), a.scale, method);
  if (ang) lf = angular_linear_interp(lf, ang->first, ang->second);
  save_output(lf, a.out, dtype);
  RunManifest m = manifest("baseline", "", 0, {a.in}, {a.out});
  m.settings = {{"baseline.scale", std::to_string(a.scale)}, {"baseline.method", a.method},
                {"baseline.angular", a.angular}};
  write_manifest(a.out, m);
  std::cout << "wrote " << a.out << " (" << to_string(lf.shape()) << ")\n";
  return 0;
}

struct GradcheckArgs {
  std::uint64_t seed = 1;
  double tolerance = kGradCheckTolerance;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  const auto cases = run_gradcheck_suite(a.seed, a.tolerance);
  std::cout << format_gradcheck_table(cases);
  const bool ok = std::all_of(cases.begin(), cases.end(), [](const GradCheckCase& c) { return c.report.pass(); });
  std::cout << (ok ? "all passed\n" : "FAILED\n");
  return ok ? 0 : static_cast<int>(ErrorCategory::kCompute);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Light-field super-resolution toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersionString);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "render a synthetic layered scene");
  add_common(c_synth, synth.common);
  c_synth->add_option("--out", synth.out, "output .lf4 file or view directory")->required();
  c_synth->add_option("--seed", synth.seed, "scene seed");
  c_synth->add_option("--dtype", synth.dtype, "f32 or u8");

  DegradeArgs deg;
  auto* c_deg = app.add_subcommand("degrade", "blur, decimate and add noise");
  add_common(c_deg, deg.common);
  c_deg->add_option("--in", deg.in)->required();
  c_deg->add_option("--out", deg.out)->required();
  c_deg->add_option("--scale", deg.scale);
  c_deg->add_option("--noise-std", deg.noise_std, "noise std on the [0,255] scale");
  c_deg->add_option("--sigma", deg.sigma, "Gaussian blur sigma");
  c_deg->add_option("--blur-size", deg.blur_size, "odd blur kernel edge");
  c_deg->add_option("--seed", deg.seed, "noise seed");
  c_deg->add_option("--angular", deg.angular, "keep a uniform SxT subset of views, e.g. 3x3");
  c_deg->add_option("--dtype", deg.dtype);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "train a model on a directory of light fields");
  add_common(c_train, train.common);
  c_train->add_option("--data", train.data, "dataset directory")->required();
  c_train->add_option("--out", train.out, "output checkpoint")->required();
  c_train->add_option("--resume", train.resume, "checkpoint to continue from");
  c_train->add_option("--history", train.history, "loss history file (default <out>.history.txt)");
  c_train->add_option("--seed", train.seed, "sets both the init and the training seed");
  c_train->add_option("--max-steps", train.max_steps);
  c_train->add_option("--log-every", train.log_every, "print every Nth history record");

  SrArgs sr;
  auto* c_sr = app.add_subcommand("sr", "super-resolve a light field");
  c_sr->add_option("--in", sr.in)->required();
  c_sr->add_option("--checkpoint", sr.checkpoint)->required();
  c_sr->add_option("--out", sr.out, "final output")->required();
  c_sr->add_option("--primary-out", sr.primary_out, "also write the primary output");
  c_sr->add_option("--dtype", sr.dtype);

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "PSNR/SSIM of a prediction against ground truth");
  c_eval->add_option("--pred", ev.pred)->required();
  c_eval->add_option("--truth", ev.truth)->required();
  c_eval->add_option("--mode", ev.mode, "all or synth");
  c_eval->add_option("--input-views", ev.input_views, "input view subset for --mode synth, e.g. 3x3");
  c_eval->add_option("--format", ev.format, "text or kv");
  c_eval->add_option("--report", ev.report, "also write the report to this file");
  c_eval->add_option("--peak", ev.peak);
  c_eval->add_flag("--rgb", ev.rgb, "average over color channels instead of luma");
  c_eval->add_flag("--no-ssim", ev.no_ssim);

  EpiArgs epi;
  auto* c_epi = app.add_subcommand("epi", "dump an EPI or a sub-aperture view as PNG/PGM");
  c_epi->add_option("--in", epi.in)->required();
  c_epi->add_option("--out", epi.out, ".png or .pgm")->required();
  c_epi->add_option("--view", epi.view, "dump view s,t instead of an EPI");
  c_epi->add_option("--orientation", epi.orientation, "h: x-s slice, v: y-t slice");
  c_epi->add_option("--spatial", epi.spatial, "fixed y (h) or x (v); default center");
  c_epi->add_option("--angular", epi.angular, "fixed t (h) or s (v); default center");
  c_epi->add_option("--channel", epi.channel);

  BaselineArgs base;
  auto* c_base = app.add_subcommand("baseline", "interpolation baseline upsampling");
  c_base->add_option("--in", base.in)->required();
  c_base->add_option("--out", base.out)->required();
  c_base->add_option("--scale", base.scale);
  c_base->add_option("--method", base.method, "bicubic or linear");
  c_base->add_option("--angular", base.angular, "output angular extent SxT");
  c_base->add_option("--dtype", base.dtype);

  GradcheckArgs gc;
  auto* c_gc = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  c_gc->add_option("--seed", gc.seed);
  c_gc->add_option("--tolerance", gc.tolerance);

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorCategory::kConfig);
  }

  try {
    if (c_synth->parsed()) return cmd_synth(synth);
    if (c_deg->parsed()) return cmd_degrade(deg);
    if (c_train->parsed()) return cmd_train(train);
    if (c_sr->parsed()) return cmd_sr(sr);
    if (c_eval->parsed()) return cmd_eval(ev);
    if (c_epi->parsed()) return cmd_epi(epi);
    if (c_base->parsed()) return cmd_baseline(base);
    if (c_gc->parsed()) return cmd_gradcheck(gc);
  } catch (const Error& e) {
    std::cerr << "hrolf: error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "hrolf: error: " << e.what() << '\n';
    return static_cast<int>(ErrorCategory::kIo);
  } catch (const std::exception& e) {
    std::cerr << "hrolf: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace hrolf::cli
