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

// "key=value" line blobs embedded in checkpoints. Doubles are written with
// 17 significant digits so they round-trip exactly.

#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>

#include "hrolf/errors.hpp"

namespace hrolf {

class KeyValueWriter {
 public:
  void put(const std::string& key, const std::string& value) { out_ << key << '=' << value << '\n'; }
  void put(const std::string& key, const char* value) { put(key, std::string(value)); }
  void put(const std::string& key, bool value) { put(key, std::string(value ? "true" : "false")); }
  void put(const std::string& key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    put(key, std::string(buf));
  }
  template <typename Int, std::enable_if_t<std::is_integral_v<Int>, int> = 0>
  void put(const std::string& key, Int value) {
    put(key, std::to_string(value));
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

// Missing keys leave the target untouched; malformed values throw
// FormatError.
class KeyValueReader {
 public:
  KeyValueReader(const std::string& text, std::string source) : source_(std::move(source)) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw FormatError(source_ + ": malformed line '" + line + "'");
      values_[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void get(const std::string& key, std::string& out) const {
    if (const auto* v = find(key)) out = *v;
  }
  void get(const std::string& key, bool& out) const {
    const auto* v = find(key);
    if (v == nullptr) return;
    if (*v == "true" || *v == "1") {
      out = true;
    } else if (*v == "false" || *v == "0") {
      out = false;
    } else {
      bad(key, *v);
    }
  }
  void get(const std::string& key, double& out) const {
    const auto* v = find(key);
    if (v == nullptr) return;
    const char* first = v->data();
    const char* last = first + v->size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) bad(key, *v);
  }
  template <typename Int, std::enable_if_t<std::is_integral_v<Int>, int> = 0>
  void get(const std::string& key, Int& out) const {
    const auto* v = find(key);
    if (v == nullptr) return;
    const char* first = v->data();
    const char* last = first + v->size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) bad(key, *v);
  }

  void reject_unknown() const {
    for (const auto& [key, value] : values_) {
      if (used_.count(key) == 0) throw FormatError(source_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const std::string* find(const std::string& key) const {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }
  [[noreturn]] void bad(const std::string& key, const std::string& value) const {
    throw FormatError(source_ + ": bad value '" + value + "' for key '" + key + "'");
  }

  std::string source_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace hrolf
