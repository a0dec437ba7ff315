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

#include "hrolf/checkpoint.hpp"

#include "hrolf/binary_io.hpp"

namespace hrolf {

namespace {

constexpr char kMagic[4] = {'H', 'R', 'O', 'C'};
constexpr std::string_view kVelocityPrefix = "velocity/";
constexpr std::string_view kFeaturePrefix = "phi.";

void write_record(ByteWriter& w, const std::string& name, const Tensor<float>& value) {
  w.string(name);
  w.u32(static_cast<std::uint32_t>(value.rank()));
  for (std::size_t d : value.dims()) w.u32(static_cast<std::uint32_t>(d));
  for (float v : value.values()) w.f32(v);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  ByteWriter w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kCheckpointVersion);
  w.string(serialize(ckpt.params.config()));
  w.u8(ckpt.train ? 1 : 0);
  if (ckpt.train) {
    w.string(serialize(ckpt.train->config));
    w.u64(ckpt.train->epoch);
    w.u64(ckpt.train->step);
  }
  const std::size_t count = ckpt.params.entries().size() + ckpt.velocity.size() + ckpt.features.size();
  w.u32(static_cast<std::uint32_t>(count));
  for (const auto& e : ckpt.params.entries()) write_record(w, e.name, e.value);
  for (const auto& [name, v] : ckpt.velocity) write_record(w, std::string(kVelocityPrefix) + name, v);
  for (const auto& [name, v] : ckpt.features) write_record(w, name, v);
  return w.buffer();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& source) {
  ByteReader r(bytes, source);
  for (char c : kMagic) {
    if (r.u8("magic") != static_cast<std::uint8_t>(c)) throw FormatError(source + ": not an HROC checkpoint (bad magic)");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError(source + ": checkpoint version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  ModelConfig mcfg;
  try {
    mcfg = parse_model_config(r.string("model config"));
    validate(mcfg);
  } catch (const ConfigError& e) {
    throw FormatError(source + ": " + e.what());
  }
  Checkpoint ckpt;
  ckpt.params = init_params<float>(mcfg);
  if (r.u8("train state flag") != 0) {
    TrainProgress progress;
    progress.config = parse_train_config(r.string("train config"));
    progress.epoch = r.u64("epoch");
    progress.step = r.u64("step");
    ckpt.train = progress;
  }
  const std::uint32_t count = r.u32("record count");
  std::map<std::string, bool> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.string("record name");
    const std::uint32_t rank = r.u32("record rank");
    if (rank > 8) throw FormatError(source + ": record " + name + " has rank " + std::to_string(rank));
    std::vector<std::size_t> dims(rank);
    std::size_t size = 1;
    for (auto& d : dims) {
      d = r.u32("record dims");
      size *= d;
    }
    if (size * 4 > r.remaining()) {
      throw FormatError(source + ": truncated payload for record " + name + " (expected " + std::to_string(size * 4) +
                        " bytes, found " + std::to_string(r.remaining()) + ")");
    }
    Tensor<float> value(dims);
    for (float& v : value.values()) v = r.f32("record payload");

    if (name.starts_with(kVelocityPrefix)) {
      const std::string param = name.substr(kVelocityPrefix.size());
      if (!ckpt.params.contains(param) || ckpt.params.get(param).dims() != dims) {
        throw FormatError(source + ": velocity record " + name + " does not match a parameter");
      }
      ckpt.velocity[param] = std::move(value);
    } else if (name.starts_with(kFeaturePrefix)) {
      ckpt.features[name] = std::move(value);
    } else {
      if (!ckpt.params.contains(name)) throw FormatError(source + ": unknown parameter record " + name);
      Tensor<float>& dst = ckpt.params.get(name);
      if (dst.dims() != dims) {
        throw FormatError(source + ": record " + name + " has shape " + dims_to_string(dims) + ", expected " +
                          dims_to_string(dst.dims()));
      }
      if (seen[name]) throw FormatError(source + ": duplicate record " + name);
      seen[name] = true;
      dst = std::move(value);
    }
  }
  if (r.remaining() != 0) {
    throw FormatError(source + ": " + std::to_string(r.remaining()) + " trailing bytes after the last record");
  }
  for (const auto& e : ckpt.params.entries()) {
    if (!seen[e.name]) throw FormatError(source + ": missing parameter record " + e.name);
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return decode_checkpoint(bytes, path.string());
}

Checkpoint make_checkpoint(const TrainState& state, const TrainConfig& cfg) {
  Checkpoint ckpt;
  ckpt.params = state.params;
  ckpt.train = TrainProgress{cfg, state.step / cfg.steps_per_epoch, state.step};
  ckpt.velocity = state.sgd.velocity;
  for (const auto& [name, v] : state.phi.records()) ckpt.features[name] = v.cast<float>();
  return ckpt;
}

TrainState restore_train_state(const Checkpoint& ckpt) {
  TrainState state;
  state.params = ckpt.params;
  state.sgd.velocity = ckpt.velocity;
  const std::size_t channels = ckpt.params.config().image_channels;
  if (!ckpt.features.empty()) {
    std::map<std::string, Tensor<double>> records;
    for (const auto& [name, v] : ckpt.features) records[name] = v.cast<double>();
    state.phi = FeatureNet::from_records(records, channels);
  } else {
    const std::uint64_t seed = ckpt.train ? ckpt.train->config.feature_seed : TrainConfig{}.feature_seed;
    state.phi = FeatureNet::seeded(channels, seed);
  }
  if (ckpt.train) state.step = ckpt.train->step;
  return state;
}

}  // namespace hrolf
