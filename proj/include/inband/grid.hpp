#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace inband {

/// Dense row-major matrix of doubles. Used for images of arbitrary size and
/// for wavelet coefficient planes.
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, double fill = 0.0);
  Grid(int rows, int cols, std::vector<double> values);

  static Grid square(int side, double fill = 0.0) { return Grid(side, side, fill); }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(int i, int j) noexcept { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const noexcept { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  std::span<double> row(int i) noexcept { return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const double> row(int i) const noexcept {
    return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  Grid transposed() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

double max_abs_diff(const Grid& lhs, const Grid& rhs);

/// Separable Gaussian of standard deviation sd (in samples), truncated at
/// 3 sd, with clamped borders. A non-positive sd returns a copy.
Grid gaussian_blur(const Grid& g, double sd);

constexpr bool is_pow2(long long v) noexcept { return v > 0 && (v & (v - 1)) == 0; }

/// log2 of a positive power of two.
constexpr int ilog2(long long v) noexcept {
  int r = 0;
  while (v > 1) {
    v >>= 1;
    ++r;
  }
  return r;
}

/// Floor division and non-negative modulo for signed operands.
constexpr long long floor_div(long long a, long long b) noexcept {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
constexpr long long pos_mod(long long a, long long m) noexcept {
  long long r = a % m;
  return r < 0 ? r + m : r;
}

/// Square grayscale image of side 2^N, N >= 1, with finite intensities.
class ImageGrid {
 public:
  ImageGrid() = default;
  /// Throws DimensionError unless `g` is square with power-of-two side >= 2
  /// and every pixel is finite.
  explicit ImageGrid(Grid g);

  int side() const noexcept { return grid_.rows(); }
  int levels() const noexcept { return ilog2(grid_.rows()); }
  double operator()(int i, int j) const noexcept { return grid_(i, j); }
  const Grid& grid() const noexcept { return grid_; }

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

 private:
  Grid grid_;
};

}  // namespace inband
