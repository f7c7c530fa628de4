// Copyright 2026 The rigidflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

#include "rigidflow/common.hpp"

namespace rigidflow {

/// Dense row-major H x W grid. Pixel centers sit at integer coordinates;
/// (0, 0) is the top-left pixel center. This convention is shared by every
/// consumer (warping, projection, metrics).
template <typename T>
class Grid {
 public:
  Grid() = default;

  Grid(int height, int width, const T& fill = T{})
      : height_(height), width_(width) {
    if (height < 0 || width < 0) {
      throw InvalidInput("grid dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(height) * width, fill);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::int64_t size() const {
    return static_cast<std::int64_t>(height_) * width_;
  }
  bool empty() const { return data_.empty(); }

  bool same_shape(int h, int w) const { return height_ == h && width_ == w; }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return same_shape(other.height(), other.width());
  }

  bool in_bounds(int y, int x) const {
    return y >= 0 && y < height_ && x >= 0 && x < width_;
  }

  T& operator()(int y, int x) {
    assert(in_bounds(y, x));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  const T& operator()(int y, int x) const {
    assert(in_bounds(y, x));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  void fill(const T& value) { data_.assign(data_.size(), value); }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

/// {0, 1} mask grid.
using BinaryMask = Grid<std::uint8_t>;

inline void require_same_shape(int h, int w, int h2, int w2,
                               const char* what) {
  if (h != h2 || w != w2) {
    throw InvalidInput(std::string("shape mismatch in ") + what + ": " +
                       std::to_string(h) + "x" + std::to_string(w) + " vs " +
                       std::to_string(h2) + "x" + std::to_string(w2));
  }
}

}  // namespace rigidflow
