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

#include <cmath>
#include <cstdint>
#include <numbers>

#include "icpc/model/params.hpp"

namespace icpc {

struct AdamConfig {
  double lr = 1e-3;
  double min_lr = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled (AdamW style)
  double clip_norm = 1.0;     // global gradient-norm clip; <= 0 disables
  int warmup_steps = 0;
  int total_steps = 0;        // cosine horizon; 0 keeps lr constant
};

// Linear warmup, then cosine decay from lr to min_lr over total_steps.
[[nodiscard]] inline double scheduled_lr(const AdamConfig& c, std::int64_t step) {
  if (c.warmup_steps > 0 && step < c.warmup_steps) {
    return c.lr * static_cast<double>(step + 1) / c.warmup_steps;
  }
  if (c.total_steps <= 0) return c.lr;
  const double span = std::max<double>(1.0, c.total_steps - c.warmup_steps);
  const double t = std::min(1.0, static_cast<double>(step - c.warmup_steps) / span);
  return c.min_lr + 0.5 * (c.lr - c.min_lr) * (1.0 + std::cos(std::numbers::pi * t));
}

template <typename T>
struct AdamState {
  ParamSet<T> m;
  ParamSet<T> v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(const ParamSet<T>& like)
      : m(like.zeros_like()), v(like.zeros_like()) {}
};

template <typename T>
void adam_step(ParamSet<T>& params, ParamSet<T>& grads, AdamState<T>& st,
               const AdamConfig& c) {
  auto g = grads.flat();
  if (c.clip_norm > 0.0) {
    double sq = 0.0;
    for (T x : g) sq += static_cast<double>(x) * static_cast<double>(x);
    const double norm = std::sqrt(sq);
    if (norm > c.clip_norm) {
      const T s = static_cast<T>(c.clip_norm / norm);
      for (T& x : g) x *= s;
    }
  }
  const double lr = scheduled_lr(c, st.step);
  ++st.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(st.step));
  auto p = params.flat();
  auto m = st.m.flat();
  auto v = st.v.flat();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = static_cast<T>(c.beta1 * m[i] + (1.0 - c.beta1) * g[i]);
    v[i] = static_cast<T>(c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i]);
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    double upd = mhat / (std::sqrt(vhat) + c.eps);
    if (c.weight_decay > 0.0) upd += c.weight_decay * p[i];
    p[i] = static_cast<T>(p[i] - lr * upd);
  }
}

}  // namespace icpc
