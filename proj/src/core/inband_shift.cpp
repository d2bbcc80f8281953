#include "inband/inband_shift.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "inband/error.hpp"
#include "inband/kernels/kernels.hpp"

namespace inband {

int DyadicShift::trailing_power() const noexcept {
  if (numerator == 0) return 0;
  int t = 0;
  std::int64_t v = numerator < 0 ? -numerator : numerator;
  while ((v & 1) == 0) {
    v >>= 1;
    ++t;
  }
  return t;
}

DyadicShift DyadicShift::reduced() const noexcept {
  DyadicShift r = *this;
  while (r.added_levels > 0 && r.numerator % 2 == 0) {
    r.numerator /= 2;
    --r.added_levels;
  }
  return r;
}

DyadicShift DyadicShift::at_levels(int h) const {
  if (h < added_levels) throw ContractError("cannot express shift with fewer added levels");
  return {numerator * (std::int64_t{1} << (h - added_levels)), h, axis};
}

DyadicShift quantize_shift(double shift, int h_max, Axis axis) {
  if (h_max < 0 || h_max > 30) throw RangeError("h_max must lie in 0..30");
  if (!std::isfinite(shift)) throw ContractError("shift must be finite");
  const auto s = static_cast<std::int64_t>(std::llround(std::ldexp(shift, h_max)));
  return DyadicShift{s, h_max, axis}.reduced();
}

DifferenceField lift_dfield(const DifferenceField& d, int h0) {
  if (h0 < 0) throw RangeError("lift_dfield: h0 must be non-negative");
  const int side = d.values.rows();
  const int out_side = side << h0;
  Grid out = Grid::square(out_side);
  for (int i = 0; i < out_side; ++i)
    for (int j = 0; j < out_side; ++j) out(i, j) = d.values(i >> h0, j >> h0);
  return {d.level + h0, std::move(out)};
}

namespace {

void check_field(const DifferenceField& d) {
  const int side = d.values.rows();
  if (!d.values.is_square() || side != (1 << d.level))
    throw DimensionError("difference field of level " + std::to_string(d.level) + " must be " +
                         std::to_string(1 << d.level) + " square");
}

// Sum over working-grid columns [n0, n1) of one D row, where working column n
// lies in D column (n mod period) / width. Runs of whole D cells go through the
// vector kernel.
class RowSpan {
 public:
  RowSpan(const Grid& d, std::int64_t period, std::int64_t width)
      : d_(d), period_(period), width_(width), kern_(kernels::active()) {}

  double operator()(int r, std::int64_t n0, std::int64_t n1) const {
    const auto row = d_.row(r);
    double total = 0.0;
    std::int64_t n = n0;
    while (n < n1) {
      const std::int64_t m = pos_mod(n, period_);
      const std::int64_t c = m / width_;
      const std::int64_t off = m % width_;
      if (off != 0 || n1 - n < width_) {
        const std::int64_t len = std::min(width_ - off, n1 - n);
        total += static_cast<double>(len) * row[static_cast<std::size_t>(c)];
        n += len;
        continue;
      }
      const std::int64_t cells = std::min((n1 - n) / width_, static_cast<std::int64_t>(row.size()) - c);
      const double s = cells == 1 ? row[static_cast<std::size_t>(c)]
                                  : kern_.sum(row.subspan(static_cast<std::size_t>(c), static_cast<std::size_t>(cells)));
      total += static_cast<double>(width_) * s;
      n += cells * width_;
    }
    return total;
  }

  double at(int r, std::int64_t n) const {
    return d_(r, static_cast<int>(pos_mod(n, period_) / width_));
  }

 private:
  const Grid& d_;
  std::int64_t period_;
  std::int64_t width_;
  const kernels::KernelTable& kern_;
};

// Horizontal detail plane of a horizontally shifted image, written after the
// four-sum formula: on the working grid one level above the virtual finest
// level, an odd virtual shift cuts the first and last columns of the block in
// half (weight 1), interior columns carry weight 2, and the middle column
// cancels between the two halves. Requires h >= 1 and an odd numerator.
Grid four_sum_horizontal(const Grid& d, std::int64_t s, int h, int k) {
  const int n = ilog2(d.rows());
  const int out_level = n + h - k;
  const int side = 1 << out_level;
  const std::int64_t period = std::int64_t{1} << (n + h - 1);
  const std::int64_t width = std::int64_t{1} << (h - 1);
  const std::int64_t half_block = std::int64_t{1} << (k - 1);
  const std::int64_t q = floor_div(s, 2);
  const double divisor = 2.0 * std::ldexp(1.0, 2 * (k - 1));
  const RowSpan span(d, period, width);

  Grid out = Grid::square(side);
  for (int i = 0; i < side; ++i) {
    // Working-grid rows [half_block*i, half_block*(i+1)) grouped by D row.
    const std::int64_t m0 = half_block * i;
    const int first_row = static_cast<int>(m0 / width);
    const int row_count = half_block >= width ? static_cast<int>(half_block / width) : 1;
    const double multiplicity = static_cast<double>(std::min(half_block, width));
    for (int j = 0; j < side; ++j) {
      const std::int64_t j1 = half_block * j + q;
      const std::int64_t j3 = half_block * (j + 1) + q;
      double acc = 0.0;
      for (int r = first_row; r < first_row + row_count; ++r) {
        double term = span.at(r, j1) - span.at(r, j3);
        if (k >= 2) {
          const std::int64_t j2 = (half_block / 2) * (2 * j + 1) + q;
          term += 2.0 * span(r, j1 + 1, j2) - 2.0 * span(r, j2 + 1, j3);
        }
        acc += multiplicity * term;
      }
      out(i, j) = acc / divisor;
    }
  }
  return out;
}

struct Run {
  int first;
  int count;
  double weight;
};
using Profile = std::vector<Run>;

// Overlap weights of the virtual interval [v0, v1) with D cells of `cell`
// virtual units, wrapped with `cells` cells per period.
void append_interval(Profile& out, std::int64_t v0, std::int64_t v1, std::int64_t cell, int cells, double sign) {
  if (v1 <= v0) return;
  const std::int64_t c0 = floor_div(v0, cell);
  const std::int64_t c1 = floor_div(v1 - 1, cell);
  auto wrap = [cells](std::int64_t c) { return static_cast<int>(pos_mod(c, cells)); };
  if (c0 == c1) {
    out.push_back({wrap(c0), 1, sign * static_cast<double>(v1 - v0)});
    return;
  }
  out.push_back({wrap(c0), 1, sign * static_cast<double>((c0 + 1) * cell - v0)});
  std::int64_t c = c0 + 1;
  while (c < c1) {
    const int start = wrap(c);
    const auto count = static_cast<int>(std::min<std::int64_t>(c1 - c, cells - start));
    out.push_back({start, count, sign * static_cast<double>(cell)});
    c += count;
  }
  out.push_back({wrap(c1), 1, sign * static_cast<double>(v1 - c1 * cell)});
}

Profile block_profile(std::int64_t index, std::int64_t block, std::int64_t shift, bool split, std::int64_t cell,
                      int cells) {
  Profile p;
  const std::int64_t v0 = block * index + shift;
  if (split) {
    append_interval(p, v0, v0 + block / 2, cell, cells, 1.0);
    append_interval(p, v0 + block / 2, v0 + block, cell, cells, -1.0);
  } else {
    append_interval(p, v0, v0 + block, cell, cells, 1.0);
  }
  return p;
}

enum class Orientation { horizontal, vertical, diagonal };

// General separable evaluation: every output coefficient is a weighted sum of D
// over the shifted block, with +/- halves along the orientation's axes.
Grid separable_plane(const Grid& d, std::int64_t sx, std::int64_t sy, int h, int k, Orientation o) {
  const int n = ilog2(d.rows());
  const int cells = d.rows();
  const int side = 1 << (n + h - k);
  const std::int64_t block = std::int64_t{1} << k;
  const std::int64_t cell = std::int64_t{1} << h;
  const bool split_rows = o != Orientation::horizontal;
  const bool split_cols = o != Orientation::vertical;
  const double norm = std::ldexp(1.0, -2 * k);
  const auto& kern = kernels::active();

  std::vector<Profile> row_profiles(side), col_profiles(side);
  for (int i = 0; i < side; ++i) row_profiles[i] = block_profile(i, block, sy, split_rows, cell, cells);
  for (int j = 0; j < side; ++j) col_profiles[j] = block_profile(j, block, sx, split_cols, cell, cells);

  Grid out = Grid::square(side);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const Profile& cols = col_profiles[j];
      double total = 0.0;
      for (const Run& rr : row_profiles[i]) {
        double rows_sum = 0.0;
        for (int r = rr.first; r < rr.first + rr.count; ++r) {
          const auto row = d.row(r);
          double acc = 0.0;
          for (const Run& cr : cols) {
            const double s = cr.count == 1 ? row[static_cast<std::size_t>(cr.first)]
                                           : kern.sum(row.subspan(static_cast<std::size_t>(cr.first),
                                                                  static_cast<std::size_t>(cr.count)));
            acc += cr.weight * s;
          }
          rows_sum += acc;
        }
        total += rr.weight * rows_sum;
      }
      out(i, j) = total * norm;
    }
  }
  return out;
}

struct CommonShift {
  std::int64_t sx;
  std::int64_t sy;
  int h;  // reduced common added levels
  int k;  // reduction level relative to h; < 1 means the plane lies below the virtual resolution
};

CommonShift common_shift(const DyadicShift& x, const DyadicShift& y, int k) {
  if (x.axis != Axis::horizontal || y.axis != Axis::vertical)
    throw ContractError("shift pair must be (horizontal, vertical)");
  const int h = std::max(x.added_levels, y.added_levels);
  CommonShift c{x.at_levels(h).numerator, y.at_levels(h).numerator, h, k};
  while (c.h > 0 && c.sx % 2 == 0 && c.sy % 2 == 0) {
    c.sx /= 2;
    c.sy /= 2;
    --c.h;
    --c.k;
  }
  return c;
}

void check_reduction_level(int n, int h, int k) {
  if (k < 1 || k > n + h)
    throw RangeError("reduction level " + std::to_string(k) + " outside 1.." + std::to_string(n + h));
}

Grid pair_plane(const DifferenceField& d, const CommonShift& c, Orientation o) {
  if (c.k < 1) return Grid::square(1 << (d.level + c.h - c.k));  // below the virtual resolution: no detail
  return separable_plane(d.values, c.sx, c.sy, c.h, c.k, o);
}

}  // namespace

ShiftedDetailPlane shifted_detail_plane(const DifferenceField& d, const DyadicShift& shift, int k) {
  check_field(d);
  const int n = d.level;
  check_reduction_level(n, shift.added_levels, k);
  const DyadicShift red = shift.reduced();
  const int k_red = k - (shift.added_levels - red.added_levels);
  ShiftedDetailPlane out{k, n + shift.added_levels - k, {}};
  const bool horizontal = shift.axis == Axis::horizontal;

  if (k_red < 1) {
    out.values = Grid::square(1 << out.level);
  } else if (red.added_levels == 0) {
    // Whole-pixel shift: D^N indexed directly.
    out.values = horizontal ? separable_plane(d.values, red.numerator, 0, 0, k_red, Orientation::horizontal)
                            : separable_plane(d.values, 0, red.numerator, 0, k_red, Orientation::vertical);
  } else if (horizontal) {
    out.values = four_sum_horizontal(d.values, red.numerator, red.added_levels, k_red);
  } else {
    // Vertical analog: swap the roles of rows and columns.
    out.values = four_sum_horizontal(d.values.transposed(), red.numerator, red.added_levels, k_red).transposed();
  }
  return out;
}

ShiftedDetailPair shifted_detail_pair(const DifferenceField& d, const DyadicShift& shift_x,
                                      const DyadicShift& shift_y, int k) {
  check_field(d);
  const int h = std::max(shift_x.added_levels, shift_y.added_levels);
  check_reduction_level(d.level, h, k);
  const CommonShift c = common_shift(shift_x, shift_y, k);
  const int level = d.level + h - k;
  return {{k, level, pair_plane(d, c, Orientation::horizontal)}, {k, level, pair_plane(d, c, Orientation::vertical)}};
}

ShiftedDetailPlane shifted_diagonal_plane(const DifferenceField& d, const DyadicShift& shift_x,
                                          const DyadicShift& shift_y, int k) {
  check_field(d);
  const int h = std::max(shift_x.added_levels, shift_y.added_levels);
  check_reduction_level(d.level, h, k);
  const CommonShift c = common_shift(shift_x, shift_y, k);
  return {k, d.level + h - k, pair_plane(d, c, Orientation::diagonal)};
}

HaarPyramid shifted_pyramid(const DifferenceField& d, double global_approx, const DyadicShift& shift_x,
                            const DyadicShift& shift_y) {
  check_field(d);
  const int n = d.level;
  const int h = std::max(shift_x.added_levels, shift_y.added_levels);
  HaarPyramid pyr;
  pyr.global_approx = global_approx;
  pyr.details.resize(n);
  for (int l = 0; l < n; ++l) {
    const int k = n + h - l;
    const CommonShift c = common_shift(shift_x, shift_y, k);
    pyr.details[l].horizontal = pair_plane(d, c, Orientation::horizontal);
    pyr.details[l].vertical = pair_plane(d, c, Orientation::vertical);
    pyr.details[l].diagonal = pair_plane(d, c, Orientation::diagonal);
  }
  return pyr;
}

}  // namespace inband
