#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dislogen/errors.hpp"

namespace dislogen {

// Dense row-major 2D array. Value type, cheap to move.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Grid(std::size_t rows, std::size_t cols, std::vector<T> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
      throw DimensionError("grid value count does not match rows*cols");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  bool same_shape(const Grid& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> values_;
};

using ScalarGrid = Grid<double>;
// 0 = background, 1 = foreground.
using BinaryGrid = Grid<std::uint8_t>;

template <typename T, typename U>
void require_same_shape(const Grid<T>& a, const Grid<U>& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": grid dimensions differ");
  }
}

inline ScalarGrid to_scalar(const BinaryGrid& g) {
  ScalarGrid out(g.rows(), g.cols());
  auto src = g.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 1.0 : 0.0;
  return out;
}

// Foreground where value >= threshold.
inline BinaryGrid binarize(const ScalarGrid& g, double threshold = 0.5) {
  BinaryGrid out(g.rows(), g.cols());
  auto src = g.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= threshold ? 1 : 0;
  return out;
}

inline std::size_t count_foreground(const BinaryGrid& g) {
  std::size_t n = 0;
  for (auto v : g.values()) n += v ? 1 : 0;
  return n;
}

}  // namespace dislogen
