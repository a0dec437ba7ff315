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

#include "hrolf/manifest.hpp"

#include "hrolf/binary_io.hpp"
#include "hrolf/errors.hpp"
#include "hrolf/kv_text.hpp"

namespace hrolf {

std::string serialize(const RunManifest& m) {
  KeyValueWriter w;
  w.put("command", m.command);
  w.put("version", m.version);
  w.put("config", m.config_path);
  w.put("seed", m.seed);
  for (std::size_t i = 0; i < m.inputs.size(); ++i) w.put("input." + std::to_string(i), m.inputs[i]);
  for (std::size_t i = 0; i < m.outputs.size(); ++i) w.put("output." + std::to_string(i), m.outputs[i]);
  for (const auto& [key, value] : m.settings) w.put("set." + key, value);
  return w.str();
}

RunManifest parse_run_manifest(const std::string& text) {
  RunManifest m;
  m.version.clear();
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("run manifest: malformed line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "command") {
      m.command = value;
    } else if (key == "version") {
      m.version = value;
    } else if (key == "config") {
      m.config_path = value;
    } else if (key == "seed") {
      KeyValueReader("seed=" + value, "run manifest").get("seed", m.seed);
    } else if (key.rfind("input.", 0) == 0) {
      m.inputs.push_back(value);
    } else if (key.rfind("output.", 0) == 0) {
      m.outputs.push_back(value);
    } else if (key.rfind("set.", 0) == 0) {
      m.settings.emplace_back(key.substr(4), value);
    } else {
      throw FormatError("run manifest: unknown key '" + key + "'");
    }
  }
  return m;
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  if (!p.has_filename()) p = p.parent_path();
  p += ".run.txt";
  return p;
}

void write_manifest(const std::filesystem::path& output, const RunManifest& m) {
  const std::string text = serialize(m);
  write_file_atomic(manifest_path(output),
                    std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace hrolf
