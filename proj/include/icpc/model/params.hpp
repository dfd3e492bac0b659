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

#include <Eigen/Dense>

#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "icpc/error.hpp"

namespace icpc {

template <typename T>
using MatrixR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

// Named tensors packed into one contiguous buffer, so optimizers and
// serializers can treat the whole model as a flat array.
template <typename T>
class ParamSet {
 public:
  struct Entry {
    std::string name;
    std::vector<int> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
  };

  std::size_t add(std::string name, std::vector<int> shape) {
    const std::size_t size = std::accumulate(
        shape.begin(), shape.end(), std::size_t{1},
        [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
    entries_.push_back({std::move(name), std::move(shape), data_.size(), size});
    data_.resize(data_.size() + size, T(0));
    return entries_.size() - 1;
  }

  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  [[nodiscard]] std::span<T> flat() { return data_; }
  [[nodiscard]] std::span<const T> flat() const { return data_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  [[nodiscard]] std::span<T> span(std::size_t idx) {
    const Entry& e = entries_[idx];
    return {data_.data() + e.offset, e.size};
  }
  [[nodiscard]] std::span<const T> span(std::size_t idx) const {
    const Entry& e = entries_[idx];
    return {data_.data() + e.offset, e.size};
  }

  // Rank-1 tensors map to a 1 x n row; rank-2 to rows x cols.
  [[nodiscard]] Eigen::Map<MatrixR<T>> matrix(std::size_t idx) {
    const Entry& e = entries_[idx];
    return {data_.data() + e.offset, rows_of(e), cols_of(e)};
  }
  [[nodiscard]] Eigen::Map<const MatrixR<T>> matrix(std::size_t idx) const {
    const Entry& e = entries_[idx];
    return {data_.data() + e.offset, rows_of(e), cols_of(e)};
  }

  [[nodiscard]] std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].name == name) return i;
    }
    throw FormatError("no parameter named '" + name + "'");
  }

  [[nodiscard]] ParamSet zeros_like() const {
    ParamSet out = *this;
    std::fill(out.data_.begin(), out.data_.end(), T(0));
    return out;
  }

  void set_zero() { std::fill(data_.begin(), data_.end(), T(0)); }

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    if (a.data_ != b.data_ || a.entries_.size() != b.entries_.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
      if (a.entries_[i].name != b.entries_[i].name ||
          a.entries_[i].shape != b.entries_[i].shape) {
        return false;
      }
    }
    return true;
  }

 private:
  static Eigen::Index rows_of(const Entry& e) {
    return e.shape.size() >= 2 ? e.shape[0] : 1;
  }
  static Eigen::Index cols_of(const Entry& e) {
    if (e.shape.empty()) return 1;
    if (e.shape.size() == 1) return e.shape[0];
    return static_cast<Eigen::Index>(e.size / static_cast<std::size_t>(e.shape[0]));
  }

  std::vector<Entry> entries_;
  std::vector<T> data_;
};

}  // namespace icpc
