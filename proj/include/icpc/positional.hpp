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

// Consistency-aware selection of position-embedding rows for compressed
// inputs. A model is trained with a position table sized for its largest
// patch grid (T x H x W, raster order: time-major, then row, then column).
// A compressed input produces a smaller grid (t x h x w); the functions
// here choose which rows of the full table encode it.

#include <cstdint>
#include <string>
#include <vector>

#include "icpc/error.hpp"

namespace icpc {

// Patch-grid shape. Text uses {1, 1, length}; images and spectrograms use
// {1, rows, cols}; video uses {frames, rows, cols}.
struct GridDims {
  int time = 1;
  int height = 1;
  int width = 1;

  [[nodiscard]] constexpr std::int64_t total() const noexcept {
    return static_cast<std::int64_t>(time) * height * width;
  }
  [[nodiscard]] constexpr bool valid() const noexcept {
    return time >= 1 && height >= 1 && width >= 1;
  }
  [[nodiscard]] constexpr bool fits_in(const GridDims& full) const noexcept {
    return time <= full.time && height <= full.height && width <= full.width;
  }
  friend constexpr bool operator==(const GridDims&, const GridDims&) = default;

  [[nodiscard]] std::string str() const {
    return std::to_string(time) + "x" + std::to_string(height) + "x" +
           std::to_string(width);
  }
};

struct PositionSelection {
  std::vector<int> indices;
  GridDims full;
  GridDims compressed;

  friend bool operator==(const PositionSelection&,
                         const PositionSelection&) = default;
};

enum class PositionScheme { consistent, first_n };

namespace detail {

inline void check_grids(const GridDims& full, const GridDims& comp) {
  if (!full.valid() || !comp.valid()) {
    throw InvalidCompression("grid dimensions must be >= 1 (full " +
                             full.str() + ", compressed " + comp.str() + ")");
  }
  if (!comp.fits_in(full)) {
    throw InvalidCompression("compressed grid " + comp.str() +
                             " exceeds full grid " + full.str());
  }
}

}  // namespace detail

// Sub-box anchored at the origin of the full grid:
// index(f, r, c) = f * H * W + r * W + c, using the FULL row width W and
// frame area H * W, so every axis keeps the stride it had during training.
[[nodiscard]] inline PositionSelection select_3d(const GridDims& full,
                                                 const GridDims& comp) {
  detail::check_grids(full, comp);
  PositionSelection sel{{}, full, comp};
  sel.indices.reserve(static_cast<std::size_t>(comp.total()));
  const int frame_area = full.height * full.width;
  for (int f = 0; f < comp.time; ++f) {
    for (int r = 0; r < comp.height; ++r) {
      for (int c = 0; c < comp.width; ++c) {
        sel.indices.push_back(f * frame_area + r * full.width + c);
      }
    }
  }
  return sel;
}

[[nodiscard]] inline PositionSelection select_2d(const GridDims& full,
                                                 const GridDims& comp) {
  if (full.time != 1 || comp.time != 1) {
    throw InvalidCompression("select_2d expects single-frame grids, got " +
                             full.str() + " / " + comp.str());
  }
  return select_3d(full, comp);
}

[[nodiscard]] inline PositionSelection select_1d(int full_len, int comp_len) {
  if (full_len < 1 || comp_len < 1 || comp_len > full_len) {
    throw InvalidCompression("sequence length " + std::to_string(comp_len) +
                             " is not in [1, " + std::to_string(full_len) +
                             "]");
  }
  return select_3d(GridDims{1, 1, full_len}, GridDims{1, 1, comp_len});
}

// The naive arm: the first comp.total() rows, whatever the grid shape.
[[nodiscard]] inline PositionSelection first_n_baseline(const GridDims& full,
                                                        const GridDims& comp) {
  if (!full.valid() || !comp.valid() || comp.total() > full.total()) {
    throw InvalidCompression("compressed grid " + comp.str() +
                             " has more cells than full grid " + full.str());
  }
  PositionSelection sel{{}, full, comp};
  sel.indices.resize(static_cast<std::size_t>(comp.total()));
  for (std::size_t i = 0; i < sel.indices.size(); ++i) {
    sel.indices[i] = static_cast<int>(i);
  }
  return sel;
}

[[nodiscard]] inline PositionSelection select_positions(PositionScheme scheme,
                                                        const GridDims& full,
                                                        const GridDims& comp) {
  return scheme == PositionScheme::consistent ? select_3d(full, comp)
                                              : first_n_baseline(full, comp);
}

// True iff every pair of axis-adjacent cells in the compressed grid differs
// by the full-grid stride of that axis (1, W, H * W).
[[nodiscard]] inline bool verify_consistency(const PositionSelection& sel) {
  const GridDims& comp = sel.compressed;
  const GridDims& full = sel.full;
  if (!comp.valid() || !full.valid() ||
      static_cast<std::int64_t>(sel.indices.size()) != comp.total()) {
    return false;
  }
  const std::int64_t row_stride = full.width;
  const std::int64_t frame_stride =
      static_cast<std::int64_t>(full.height) * full.width;
  auto at = [&](int f, int r, int c) -> std::int64_t {
    return sel.indices[(static_cast<std::size_t>(f) * comp.height + r) *
                           comp.width +
                       c];
  };
  for (int f = 0; f < comp.time; ++f) {
    for (int r = 0; r < comp.height; ++r) {
      for (int c = 0; c < comp.width; ++c) {
        const std::int64_t here = at(f, r, c);
        if (c + 1 < comp.width && at(f, r, c + 1) - here != 1) return false;
        if (r + 1 < comp.height && at(f, r + 1, c) - here != row_stride) {
          return false;
        }
        if (f + 1 < comp.time && at(f + 1, r, c) - here != frame_stride) {
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace icpc
