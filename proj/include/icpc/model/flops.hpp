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

// Matmul FLOP accounting (2 FLOPs per multiply-add). Elementwise work
// (layer norm, softmax, GELU) is left out; it is linear in the token count
// and small next to the matmuls.

#include <cstdint>

#include "icpc/model/config.hpp"

namespace icpc {

// Counts what a forward pass actually executed, from the runtime operand
// shapes.
struct FlopCounter {
  std::uint64_t attention = 0;  // QK^T and PV products
  std::uint64_t total = 0;

  void add_matmul(std::int64_t m, std::int64_t k, std::int64_t n,
                  bool is_attention = false) {
    const auto f = static_cast<std::uint64_t>(2 * m * k * n);
    total += f;
    if (is_attention) attention += f;
  }
};

// n_tokens excludes the class token.
[[nodiscard]] inline std::uint64_t attention_flops(const ModelConfig& c,
                                                   std::int64_t n_tokens) {
  const std::int64_t seq = n_tokens + 1;
  return static_cast<std::uint64_t>(c.n_layers) * 4u *
         static_cast<std::uint64_t>(seq * seq * c.embed_dim);
}

[[nodiscard]] inline std::uint64_t forward_flops(const ModelConfig& c,
                                                 std::int64_t n_tokens) {
  const std::int64_t seq = n_tokens + 1;
  const std::int64_t d = c.embed_dim;
  const std::int64_t hd = c.hidden_dim();
  std::uint64_t f = 0;
  if (c.modality != Modality::text) {
    f += static_cast<std::uint64_t>(2 * n_tokens * c.patch_dim() * d);
  }
  const auto per_layer =
      static_cast<std::uint64_t>(2 * seq * d * 3 * d + 2 * seq * d * d +
                                 2 * 2 * seq * d * hd);
  f += static_cast<std::uint64_t>(c.n_layers) * per_layer +
       attention_flops(c, n_tokens);
  f += static_cast<std::uint64_t>(2 * d * c.num_classes);
  return f;
}

}  // namespace icpc
