#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "inband/grid.hpp"

namespace inband {

/// Detail planes of one pyramid level, each 2^l x 2^l.
struct DetailLevel {
  Grid horizontal;  // a: responds to variation along columns (j)
  Grid vertical;    // b: responds to variation along rows (i)
  Grid diagonal;    // c

  Grid& plane(int orientation) { return orientation == 0 ? horizontal : orientation == 1 ? vertical : diagonal; }
  const Grid& plane(int orientation) const {
    return orientation == 0 ? horizontal : orientation == 1 ? vertical : diagonal;
  }
};

/// Haar decomposition with the averaging normalization: a parent approximation
/// is the mean of its 2x2 children and the children are recovered as
///   (2i,2j)   = A + a + b + c      (2i,2j+1)   = A - a + b - c
///   (2i+1,2j) = A + a - b - c      (2i+1,2j+1) = A - a - b + c
/// Level 0 is the coarsest (1x1 planes); level N-1 is the finest.
struct HaarPyramid {
  double global_approx = 0.0;
  std::vector<DetailLevel> details;

  int levels() const noexcept { return static_cast<int>(details.size()); }
  int side() const noexcept { return 1 << levels(); }
  std::size_t detail_count() const noexcept { return (std::size_t{1} << (2 * levels())) - 1; }

  /// Throws DimensionError unless every level l has three 2^l x 2^l planes.
  void validate() const;
};

/// D^l: approximation at level l minus the global approximation.
struct DifferenceField {
  int level = 0;
  Grid values;
};

/// Retained detail coefficients, one flag per coefficient, laid out like the
/// pyramid's planes.
struct SparseMask {
  std::vector<std::array<std::vector<std::uint8_t>, 3>> levels;
  std::size_t retained = 0;

  bool kept(int level, int orientation, int i, int j) const {
    const int side = 1 << level;
    return levels[level][orientation][static_cast<std::size_t>(i) * side + j] != 0;
  }
  std::size_t count_true() const;
  static SparseMask full(int levels);
};

HaarPyramid forward_haar(const ImageGrid& img);
ImageGrid inverse_haar(const HaarPyramid& pyr);

/// Approximation plane at `level`, computed by partial synthesis.
Grid approximation_at(const HaarPyramid& pyr, int level);

/// D^level from the detail planes alone (X/Y/Z/W recursion). `level` may equal
/// N, in which case the result is the full-resolution field I - mean(I).
DifferenceField compute_difference_field(const HaarPyramid& pyr, int level);

/// Coefficient-wise alpha*x + beta*y.
HaarPyramid combine(double alpha, const HaarPyramid& x, double beta, const HaarPyramid& y);

namespace threshold {
/// lambda = sigma * sqrt(2 ln n), sigma = median(|finest diagonal|) / 0.6745.
struct Universal {};
/// Keep the ceil(p * n) largest-magnitude detail coefficients.
struct KeepFraction {
  double p = 1.0;
};
/// Keep coefficients with |x| >= lambda.
struct Fixed {
  double lambda = 0.0;
};
}  // namespace threshold

using ThresholdMode = std::variant<threshold::Universal, threshold::KeepFraction, threshold::Fixed>;

struct ThresholdResult {
  HaarPyramid pyramid;
  SparseMask mask;
  double lambda = 0.0;  // effective magnitude cut (for KeepFraction: smallest kept magnitude)
};

ThresholdResult hard_threshold(const HaarPyramid& pyr, const ThresholdMode& mode);

/// Universal threshold value for a pyramid (see threshold::Universal).
double universal_threshold(const HaarPyramid& pyr);

struct Subregion {
  ImageGrid image;
  int top = 0;
  int left = 0;
};

/// Centered crop of the largest 2^N x 2^N square fitting inside `g`.
Subregion extract_pow2_subregion(const Grid& g);

}  // namespace inband
