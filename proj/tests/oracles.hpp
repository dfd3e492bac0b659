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

// Independent reference computations used by the unit and acceptance
// suites. Nothing here calls into the code paths it is used to check.

#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "icpc/positional.hpp"

namespace icpc::oracle {

// Propagates the adjacency constraints (+1 along x, +W along y, +H*W along
// time) outward from cell (0,0,0) pinned at table index 0. Every cell is
// reached through BFS, and every constraint edge is re-checked afterwards,
// so a returned assignment is the unique solution of the constraint system.
inline std::optional<std::vector<int>> solve_adjacency(const GridDims& full,
                                                       const GridDims& comp) {
  const std::int64_t n = comp.total();
  std::vector<std::int64_t> value(static_cast<std::size_t>(n), -1);
  auto id = [&](int f, int r, int c) {
    return (static_cast<std::int64_t>(f) * comp.height + r) * comp.width + c;
  };
  const std::int64_t dx = 1, dy = full.width,
                     dt = static_cast<std::int64_t>(full.width) * full.height;
  struct Cell {
    int f, r, c;
  };
  std::queue<Cell> todo;
  value[0] = 0;
  todo.push({0, 0, 0});
  while (!todo.empty()) {
    const Cell cur = todo.front();
    todo.pop();
    const std::int64_t v = value[static_cast<std::size_t>(id(cur.f, cur.r, cur.c))];
    const Cell nbrs[6] = {{cur.f, cur.r, cur.c + 1}, {cur.f, cur.r, cur.c - 1},
                          {cur.f, cur.r + 1, cur.c}, {cur.f, cur.r - 1, cur.c},
                          {cur.f + 1, cur.r, cur.c}, {cur.f - 1, cur.r, cur.c}};
    const std::int64_t deltas[6] = {dx, -dx, dy, -dy, dt, -dt};
    for (int k = 0; k < 6; ++k) {
      const Cell nb = nbrs[k];
      if (nb.f < 0 || nb.r < 0 || nb.c < 0 || nb.f >= comp.time ||
          nb.r >= comp.height || nb.c >= comp.width) {
        continue;
      }
      auto& slot = value[static_cast<std::size_t>(id(nb.f, nb.r, nb.c))];
      if (slot < 0) {
        slot = v + deltas[k];
        todo.push(nb);
      } else if (slot != v + deltas[k]) {
        return std::nullopt;
      }
    }
  }
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t v : value) {
    if (v < 0 || v >= full.total()) return std::nullopt;
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// True when the compressed box occupies a raster-order prefix of the full
// grid, i.e. when taking the first n table rows is already consistent.
inline bool is_raster_prefix(const GridDims& full, const GridDims& comp) {
  const bool rows_ok = comp.height == 1 || comp.width == full.width;
  const bool frames_ok =
      comp.time == 1 || (comp.height == full.height && comp.width == full.width);
  return rows_ok && frames_ok;
}

inline double softmax_max_prob(const std::vector<double>& logits) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  double s = 0.0;
  for (double v : logits) s += std::exp(v - m);
  return 1.0 / s;
}

}  // namespace icpc::oracle

#include <algorithm>
#include <map>
#include <string>

#include "icpc/model/transformer.hpp"

namespace icpc::oracle {

// Straight-loop forward pass of the classifier for one unpadded sample,
// read from the parameter names only. Used as the hand-trace reference.
inline std::vector<double> reference_logits(const Model<double>& model,
                                            const ModelInput& in) {
  const ModelConfig& c = model.config;
  const auto& P = model.params;
  auto get = [&](const std::string& name) {
    const auto s = P.span(P.index_of(name));
    return std::vector<double>(s.begin(), s.end());
  };
  const int d = c.embed_dim, H = c.n_heads, dh = d / H, hd = c.hidden_dim();
  const int n = in.length();
  const int seq = n + 1;
  using Rows = std::vector<std::vector<double>>;
  Rows x(static_cast<std::size_t>(seq), std::vector<double>(static_cast<std::size_t>(d)));
  const auto cls = get("embed.cls");
  const auto pos = get("embed.pos");
  for (int j = 0; j < d; ++j) x[0][j] = cls[j] + pos[j];
  if (c.modality == Modality::text) {
    const auto tok = get("embed.token.weight");
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) {
        x[i + 1][j] = tok[in.token_ids[i] * d + j] +
                      pos[(1 + in.positions.indices[i]) * d + j];
      }
    }
  } else {
    const auto w = get("embed.patch.weight");
    const auto bias = get("embed.patch.bias");
    const int pd = c.patch_dim();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) {
        double acc = bias[j] + pos[(1 + in.positions.indices[i]) * d + j];
        for (int k = 0; k < pd; ++k) acc += in.patches[i * pd + k] * w[k * d + j];
        x[i + 1][j] = acc;
      }
    }
  }
  auto layer_norm = [&](const Rows& v, const std::vector<double>& g,
                        const std::vector<double>& b) {
    Rows out = v;
    for (auto& row : out) {
      double mean = 0.0, var = 0.0;
      for (double a : row) mean += a;
      mean /= d;
      for (double a : row) var += (a - mean) * (a - mean);
      var /= d;
      for (int j = 0; j < d; ++j) {
        row[j] = (row[j] - mean) / std::sqrt(var + 1e-6) * g[j] + b[j];
      }
    }
    return out;
  };
  auto linear = [](const Rows& v, const std::vector<double>& w,
                   const std::vector<double>& b, int in_dim, int out_dim) {
    Rows out(v.size(), std::vector<double>(static_cast<std::size_t>(out_dim)));
    for (std::size_t r = 0; r < v.size(); ++r) {
      for (int j = 0; j < out_dim; ++j) {
        double acc = b[j];
        for (int k = 0; k < in_dim; ++k) acc += v[r][k] * w[k * out_dim + j];
        out[r][j] = acc;
      }
    }
    return out;
  };
  for (int l = 0; l < c.n_layers; ++l) {
    const std::string p = "blocks." + std::to_string(l) + ".";
    const Rows a = layer_norm(x, get(p + "ln1.gamma"), get(p + "ln1.beta"));
    const Rows qkv = linear(a, get(p + "attn.qkv.weight"), get(p + "attn.qkv.bias"), d, 3 * d);
    Rows o(static_cast<std::size_t>(seq), std::vector<double>(static_cast<std::size_t>(d)));
    for (int h = 0; h < H; ++h) {
      for (int i = 0; i < seq; ++i) {
        std::vector<double> s(static_cast<std::size_t>(seq));
        double mx = -1e300;
        for (int j = 0; j < seq; ++j) {
          double dot = 0.0;
          for (int k = 0; k < dh; ++k) dot += qkv[i][h * dh + k] * qkv[j][d + h * dh + k];
          s[j] = dot / std::sqrt(static_cast<double>(dh));
          mx = std::max(mx, s[j]);
        }
        double z = 0.0;
        for (auto& v : s) z += (v = std::exp(v - mx));
        for (int k = 0; k < dh; ++k) {
          double acc = 0.0;
          for (int j = 0; j < seq; ++j) acc += s[j] / z * qkv[j][2 * d + h * dh + k];
          o[i][h * dh + k] = acc;
        }
      }
    }
    const Rows attn = linear(o, get(p + "attn.out.weight"), get(p + "attn.out.bias"), d, d);
    for (int i = 0; i < seq; ++i) for (int j = 0; j < d; ++j) x[i][j] += attn[i][j];
    const Rows cn = layer_norm(x, get(p + "ln2.gamma"), get(p + "ln2.beta"));
    Rows u = linear(cn, get(p + "mlp.fc1.weight"), get(p + "mlp.fc1.bias"), d, hd);
    for (auto& row : u) {
      for (auto& v : row) v = 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)));
    }
    const Rows m = linear(u, get(p + "mlp.fc2.weight"), get(p + "mlp.fc2.bias"), hd, d);
    for (int i = 0; i < seq; ++i) for (int j = 0; j < d; ++j) x[i][j] += m[i][j];
  }
  const Rows f = layer_norm(Rows{x[0]}, get("norm.gamma"), get("norm.beta"));
  return linear(f, get("head.weight"), get("head.bias"), d, c.num_classes)[0];
}

// Central differences at step 1e-5 in 64-bit, per-element relative error
// with a 1e-6 floor on the denominator. `per_group` receives the worst
// error of every parameter tensor.
inline double max_relative_grad_error(Model<double>& model,
                                      const std::vector<ModelInput>& batch,
                                      std::string* worst = nullptr,
                                      std::map<std::string, double>* per_group = nullptr) {
  const auto lg = loss_and_grads<double>(model, batch);
  double worst_err = 0.0;
  const double h = 1e-5;
  for (std::size_t e = 0; e < model.params.entries().size(); ++e) {
    auto p = model.params.span(e);
    const auto g = lg.grads.span(e);
    const std::string& name = model.params.entries()[e].name;
    double group = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double orig = p[i];
      p[i] = orig + h;
      const double up = batch_loss<double>(model, batch);
      p[i] = orig - h;
      const double down = batch_loss<double>(model, batch);
      p[i] = orig;
      const double fd = (up - down) / (2 * h);
      const double err = std::abs(fd - g[i]) /
                         std::max({std::abs(fd), std::abs(g[i]), 1e-6});
      group = std::max(group, err);
      if (err > worst_err) {
        worst_err = err;
        if (worst) *worst = name + "[" + std::to_string(i) + "]";
      }
    }
    if (per_group) (*per_group)[name] = group;
  }
  return worst_err;
}

}  // namespace icpc::oracle
