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

#include <json.hpp>

#include <string>

#include "icpc/error.hpp"
#include "icpc/positional.hpp"
#include "icpc/sample.hpp"

namespace icpc {

struct ModelConfig {
  Modality modality = Modality::image;
  int embed_dim = 64;
  int n_layers = 4;
  int n_heads = 4;
  int mlp_ratio = 4;
  int patch_size = 16;
  int channels = 1;
  // Largest patch grid seen in training; sizes the position table.
  GridDims max_grid{1, 14, 14};
  int vocab_size = 0;
  int num_classes = 2;
  double dropout = 0.1;

  [[nodiscard]] int head_dim() const { return embed_dim / n_heads; }
  [[nodiscard]] int hidden_dim() const { return embed_dim * mlp_ratio; }
  [[nodiscard]] int patch_dim() const {
    return channels * patch_size * patch_size;
  }
  // Rows of the position table: one reserved for the class token, then one
  // per cell of max_grid.
  [[nodiscard]] int position_rows() const {
    return 1 + static_cast<int>(max_grid.total());
  }

  void validate() const {
    if (embed_dim < 1 || n_heads < 1 || embed_dim % n_heads != 0) {
      throw ConfigError("embed_dim must be a positive multiple of n_heads");
    }
    if (n_layers < 0 || mlp_ratio < 1) {
      throw ConfigError("n_layers must be >= 0 and mlp_ratio >= 1");
    }
    if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
    if (!max_grid.valid()) throw ConfigError("max_grid must be >= 1 per axis");
    if (dropout < 0.0 || dropout >= 1.0) {
      throw ConfigError("dropout must be in [0, 1)");
    }
    if (modality == Modality::text) {
      if (vocab_size < 1) throw ConfigError("text models need vocab_size >= 1");
    } else if (patch_size < 1 || channels < 1) {
      throw ConfigError("patch_size and channels must be >= 1");
    }
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"modality", std::string(to_string(c.modality))},
                     {"embed_dim", c.embed_dim},
                     {"n_layers", c.n_layers},
                     {"n_heads", c.n_heads},
                     {"mlp_ratio", c.mlp_ratio},
                     {"patch_size", c.patch_size},
                     {"channels", c.channels},
                     {"max_grid", {c.max_grid.time, c.max_grid.height,
                                   c.max_grid.width}},
                     {"vocab_size", c.vocab_size},
                     {"num_classes", c.num_classes},
                     {"dropout", c.dropout}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.modality = parse_modality(j.at("modality").get<std::string>());
  c.embed_dim = j.at("embed_dim").get<int>();
  c.n_layers = j.at("n_layers").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.mlp_ratio = j.at("mlp_ratio").get<int>();
  c.patch_size = j.at("patch_size").get<int>();
  c.channels = j.at("channels").get<int>();
  const auto& g = j.at("max_grid");
  c.max_grid = {g.at(0).get<int>(), g.at(1).get<int>(), g.at(2).get<int>()};
  c.vocab_size = j.at("vocab_size").get<int>();
  c.num_classes = j.at("num_classes").get<int>();
  c.dropout = j.at("dropout").get<double>();
}

}  // namespace icpc
