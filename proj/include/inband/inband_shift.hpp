#pragma once

// Detail coefficients of a translated image computed directly from the
// reference image's difference field, without resampling.
//
// Shifts act as sampling offsets: shifting by s/2^h produces the image
// V(x) = U(x + s/2^h), i.e. content moves towards smaller indices. The image
// is extended periodically, so shifted content wraps around the borders.

#include <cstdint>

#include "inband/grid.hpp"
#include "inband/haar.hpp"

namespace inband {

enum class Axis { horizontal, vertical };

/// Shift of s / 2^h pixels along one axis; h counts virtually added levels.
struct DyadicShift {
  std::int64_t numerator = 0;
  int added_levels = 0;
  Axis axis = Axis::horizontal;

  double pixels() const noexcept { return static_cast<double>(numerator) / static_cast<double>(1LL << added_levels); }
  /// Largest t with 2^t dividing the numerator (0 for odd or zero numerators).
  int trailing_power() const noexcept;
  /// Same shift with numerator and h halved while the numerator is even and h > 0.
  DyadicShift reduced() const noexcept;
  /// Same shift expressed with `h` added levels (h >= added_levels).
  DyadicShift at_levels(int h) const;
  bool is_zero() const noexcept { return numerator == 0; }
};

/// Rounds `shift` to the 1/2^h_max lattice and reduces to lowest terms.
DyadicShift quantize_shift(double shift, int h_max, Axis axis);

/// D^{N+h0}: every entry of D^N replicated into a 2^h0 x 2^h0 block.
DifferenceField lift_dfield(const DifferenceField& d, int h0);

struct ShiftedDetailPlane {
  int reduction_level = 1;  // k, counted from the virtual finest level N + h
  int level = 0;            // N + h - k
  Grid values;
};

/// Horizontal detail plane (or vertical, for a vertical shift) of the shifted
/// image at level N + h - k, where N is the level of `d` and h the shift's
/// added levels. 1 <= k <= N + h.
ShiftedDetailPlane shifted_detail_plane(const DifferenceField& d, const DyadicShift& shift, int k);

struct ShiftedDetailPair {
  ShiftedDetailPlane horizontal;
  ShiftedDetailPlane vertical;
};

/// Horizontal and vertical detail planes after shifting along both axes. Both
/// shifts are brought to the larger of their added-level counts; k is counted
/// from that common virtual level.
ShiftedDetailPair shifted_detail_pair(const DifferenceField& d, const DyadicShift& shift_x,
                                      const DyadicShift& shift_y, int k);

/// Diagonal plane for a 2D shift, same conventions as shifted_detail_pair.
ShiftedDetailPlane shifted_diagonal_plane(const DifferenceField& d, const DyadicShift& shift_x,
                                          const DyadicShift& shift_y, int k);

/// Full pyramid (levels 0..N-1) of the shifted image, built in-band. Used to
/// render predictions for evaluation.
HaarPyramid shifted_pyramid(const DifferenceField& d, double global_approx, const DyadicShift& shift_x,
                            const DyadicShift& shift_y);

}  // namespace inband
