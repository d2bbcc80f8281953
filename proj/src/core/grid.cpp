#include "inband/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "inband/error.hpp"

namespace inband {

Grid::Grid(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
  if (rows < 0 || cols < 0) throw DimensionError("negative grid dimensions");
}

Grid::Grid(int rows, int cols, std::vector<double> values) : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (rows < 0 || cols < 0 || data_.size() != static_cast<std::size_t>(rows) * cols)
    throw DimensionError("grid storage does not match " + std::to_string(rows) + "x" + std::to_string(cols));
}

Grid Grid::transposed() const {
  Grid out(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

double max_abs_diff(const Grid& lhs, const Grid& rhs) {
  if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) throw DimensionError("max_abs_diff: shape mismatch");
  double worst = 0.0;
  auto a = lhs.values();
  auto b = rhs.values();
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

Grid gaussian_blur(const Grid& g, double sd) {
  if (!(sd > 0.0)) return g;
  const int rows = g.rows(), cols = g.cols();
  const int reach = static_cast<int>(std::ceil(3.0 * sd));
  std::vector<double> w(2 * reach + 1);
  double total = 0.0;
  for (int d = -reach; d <= reach; ++d) total += w[d + reach] = std::exp(-0.5 * d * d / (sd * sd));
  for (double& x : w) x /= total;

  Grid tmp(rows, cols), out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (int d = -reach; d <= reach; ++d) acc += w[d + reach] * g(i, std::clamp(j + d, 0, cols - 1));
      tmp(i, j) = acc;
    }
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (int d = -reach; d <= reach; ++d) acc += w[d + reach] * tmp(std::clamp(i + d, 0, rows - 1), j);
      out(i, j) = acc;
    }
  return out;
}

ImageGrid::ImageGrid(Grid g) : grid_(std::move(g)) {
  if (!grid_.is_square() || grid_.rows() < 2 || !is_pow2(grid_.rows()))
    throw DimensionError("image must be square with power-of-two side >= 2, got " + std::to_string(grid_.rows()) + "x" +
                         std::to_string(grid_.cols()));
  for (double v : grid_.values())
    if (!std::isfinite(v)) throw DimensionError("image contains non-finite intensities");
}

}  // namespace inband
