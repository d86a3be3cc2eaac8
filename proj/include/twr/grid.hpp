#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace twr {

/// Dense row-major 2-D container. Rows index fast time / range / Doppler (n),
/// columns index slow time (m).
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{}) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Grid: negative dimensions");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  const T& operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

  bool same_shape(const Grid& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using RealGrid = Grid<double>;
using ComplexGrid = Grid<std::complex<double>>;
using MaskGrid = Grid<std::uint8_t>;

inline double max_value(const RealGrid& g) {
  if (g.empty()) throw std::invalid_argument("max_value: empty grid");
  return *std::max_element(g.raw().begin(), g.raw().end());
}

inline double min_value(const RealGrid& g) {
  if (g.empty()) throw std::invalid_argument("min_value: empty grid");
  return *std::min_element(g.raw().begin(), g.raw().end());
}

template <typename T>
bool all_finite(const Grid<T>& g) {
  for (const T& v : g.raw()) {
    if constexpr (std::is_same_v<T, std::complex<double>>) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    } else {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
  }
  return true;
}

/// Peak scaling to [0, 1]. An all-zero grid is returned unchanged.
inline RealGrid normalize_unit(const RealGrid& g) {
  RealGrid out = g;
  const double mx = max_value(g);
  if (mx > 0.0) {
    for (double& v : out.raw()) v /= mx;
  }
  return out;
}

}  // namespace twr
