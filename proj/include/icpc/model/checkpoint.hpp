// Copyright 2026 The ICPC Authors.
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
#include <string>
#include <vector>

#include <json.hpp>

#include "icpc/binary_io.hpp"
#include "icpc/model/config.hpp"
#include "icpc/model/optimizer.hpp"
#include "icpc/model/train.hpp"
#include "icpc/model/transformer.hpp"

namespace icpc {

inline constexpr std::string_view kCheckpointMagic = "ICPCCKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

// A training state plus free-form metadata (vocabulary, run config, ...).
struct Checkpoint {
  TrainState<float> state;
  nlohmann::json meta = nlohmann::json::object();
};

namespace detail {

template <typename T>
void write_params(std::ostream& out, const ParamSet<T>& p, const std::string& prefix) {
  for (std::size_t i = 0; i < p.entries().size(); ++i) {
    const auto& e = p.entries()[i];
    io::write_string(out, prefix + e.name);
    io::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.size()));
    for (int d : e.shape) io::write_pod<std::int32_t>(out, d);
    const auto s = p.span(i);
    std::vector<float> f(s.begin(), s.end());
    io::write_floats(out, f.data(), f.size());
  }
}

inline void read_params(std::istream& in, ParamSet<float>& p, const std::string& prefix) {
  for (std::size_t i = 0; i < p.entries().size(); ++i) {
    const auto& e = p.entries()[i];
    const std::string name = io::read_string(in, 4096);
    if (name != prefix + e.name) {
      throw FormatError("checkpoint: expected tensor '" + prefix + e.name +
                        "', found '" + name + "'");
    }
    const auto rank = io::read_pod<std::uint32_t>(in);
    std::vector<int> shape;
    for (std::uint32_t r = 0; r < rank && r < 8; ++r) {
      shape.push_back(io::read_pod<std::int32_t>(in));
    }
    if (shape != e.shape) throw FormatError("checkpoint: shape mismatch for '" + name + "'");
    const auto values = io::read_floats(in);
    if (values.size() != e.size) throw FormatError("checkpoint: size mismatch for '" + name + "'");
    std::copy(values.begin(), values.end(), p.span(i).begin());
  }
}

}  // namespace detail

// Parameters and optimizer moments are stored as 32-bit floats; a 64-bit
// state is narrowed on save.
template <typename T>
void save_checkpoint(const std::filesystem::path& path, const TrainState<T>& st,
                     const nlohmann::json& meta = nlohmann::json::object()) {
  auto out = io::open_out(path);
  io::write_header(out, kCheckpointMagic, kCheckpointVersion);
  const nlohmann::json header{{"config", st.model.config},
                              {"epoch", st.epoch},
                              {"step", st.step},
                              {"optimizer_step", st.optimizer.step},
                              {"seed", st.seed},
                              {"meta", meta}};
  io::write_string(out, header.dump());
  detail::write_params(out, st.model.params, "");
  detail::write_params(out, st.optimizer.m, "adam.m.");
  detail::write_params(out, st.optimizer.v, "adam.v.");
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

[[nodiscard]] inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  auto in = io::open_in(path);
  io::read_header(in, kCheckpointMagic, kCheckpointVersion, "checkpoint");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(io::read_string(in));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: bad header: ") + e.what());
  }
  Checkpoint ck;
  ModelConfig cfg;
  try {
    cfg = header.at("config").get<ModelConfig>();
    ck.state = TrainState<float>(Model<float>(cfg), header.at("seed").get<std::uint64_t>());
    ck.state.epoch = header.at("epoch").get<int>();
    ck.state.step = header.at("step").get<std::int64_t>();
    ck.state.optimizer.step = header.at("optimizer_step").get<std::int64_t>();
    ck.meta = header.at("meta");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: bad header: ") + e.what());
  }
  detail::read_params(in, ck.state.model.params, "");
  detail::read_params(in, ck.state.optimizer.m, "adam.m.");
  detail::read_params(in, ck.state.optimizer.v, "adam.v.");
  return ck;
}

// Widens a 32-bit model to another precision.
template <typename T>
[[nodiscard]] Model<T> convert_model(const Model<float>& m) {
  Model<T> out(m.config);
  const auto src = m.params.flat();
  auto dst = out.params.flat();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<T>(src[i]);
  return out;
}

}  // namespace icpc
