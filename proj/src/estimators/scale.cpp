#include <algorithm>
#include <cmath>
#include <string>

#include "inband/error.hpp"
#include "inband/estimators.hpp"

namespace inband {

double mean_curvature_radius(const Grid& plane, std::span<const std::uint8_t> retained, double kappa_min) {
  if (!retained.empty() && retained.size() != plane.size())
    throw DimensionError("mean_curvature_radius: mask size differs from plane size");
  const int rows = plane.rows(), cols = plane.cols();
  if (kappa_min <= 0.0) kappa_min = 1.0 / std::max(rows, cols);

  double total = 0.0;
  std::size_t used = 0;
  for (int i = 1; i + 1 < rows; ++i) {
    for (int j = 1; j + 1 < cols; ++j) {
      if (!retained.empty() && retained[static_cast<std::size_t>(i) * cols + j] == 0) continue;
      const double fx = 0.5 * (plane(i, j + 1) - plane(i, j - 1));
      const double fy = 0.5 * (plane(i + 1, j) - plane(i - 1, j));
      const double g2 = fx * fx + fy * fy;
      if (g2 == 0.0) continue;
      const double fxx = plane(i, j + 1) - 2.0 * plane(i, j) + plane(i, j - 1);
      const double fyy = plane(i + 1, j) - 2.0 * plane(i, j) + plane(i - 1, j);
      const double fxy = 0.25 * (plane(i + 1, j + 1) - plane(i + 1, j - 1) - plane(i - 1, j + 1) + plane(i - 1, j - 1));
      const double kappa = std::abs(fxx * fy * fy - 2.0 * fx * fy * fxy + fyy * fx * fx) / (g2 * std::sqrt(g2));
      if (!(kappa > kappa_min)) continue;
      total += 1.0 / kappa;
      ++used;
    }
  }
  if (used == 0) throw DegenerateInputError("mean_curvature_radius: no curved level sets among retained locations");
  return total / static_cast<double>(used);
}

Grid coefficient_envelope(const Grid& plane, std::span<const std::uint8_t> retained, double width) {
  if (!retained.empty() && retained.size() != plane.size())
    throw DimensionError("coefficient_envelope: mask size differs from plane size");
  const int rows = plane.rows(), cols = plane.cols();
  Grid mag(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const std::size_t at = static_cast<std::size_t>(i) * cols + j;
      if (retained.empty() || retained[at] != 0) mag(i, j) = std::abs(plane(i, j));
    }
  return gaussian_blur(mag, width * std::max(rows, cols));
}

namespace {

int radius_level(const HaarPyramid& pyr, int above_finest) {
  const int level = pyr.levels() - 1 - above_finest;
  if (level < 1) throw RangeError("scale estimation level lies above the pyramid");
  return level;
}

}  // namespace

ScaleEstimate estimate_scale(const HaarPyramid& ref, const SparseMask& ref_mask, const HaarPyramid& sen,
                             const SparseMask& sen_mask, const ScaleConfig& config) {
  const int lr = radius_level(ref, config.levels_above_finest);
  const int ls = radius_level(sen, config.levels_above_finest);
  if (static_cast<int>(ref_mask.levels.size()) != ref.levels() || static_cast<int>(sen_mask.levels.size()) != sen.levels())
    throw DimensionError("estimate_scale: mask depth differs from pyramid depth");

  const int ref_side = ref.details[lr].horizontal.rows();
  auto radius = [&](const HaarPyramid& p, const SparseMask& m, int level, int o) {
    const Grid& plane = p.details[level].plane(o);
    // An explicit kappa_min refers to the reference plane; it is rescaled so the cut follows the image.
    const double kmin = config.kappa_min > 0.0 ? config.kappa_min * ref_side / plane.rows() : 0.0;
    if (config.envelope_width <= 0.0) return mean_curvature_radius(plane, m.levels[level][o], kmin);
    return mean_curvature_radius(coefficient_envelope(plane, m.levels[level][o], config.envelope_width), {}, kmin);
  };
  const double ra_ref = radius(ref, ref_mask, lr, 0), rb_ref = radius(ref, ref_mask, lr, 1);
  const double ra_sen = radius(sen, sen_mask, ls, 0), rb_sen = radius(sen, sen_mask, ls, 1);

  ScaleEstimate e;
  e.raw = 0.5 * (ra_sen / ra_ref + rb_sen / rb_ref);
  if (!std::isfinite(e.raw) || e.raw <= 0.0) throw DegenerateInputError("estimate_scale: radius ratio is not positive");
  e.snapped = std::ldexp(1.0, static_cast<int>(std::lround(std::log2(e.raw))));
  return e;
}

HaarPyramid rescale_coeffs(const HaarPyramid& pyr, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ContractError("rescale_coeffs: scale must be positive");
  int p = 0;
  const double f = std::frexp(sigma, &p);
  if (f != 0.5) throw ContractError("rescale_coeffs: scale " + std::to_string(sigma) + " is not a power of two");
  p -= 1;  // sigma = 2^p
  const int out_levels = pyr.levels() - p;
  if (out_levels < 1) throw RangeError("rescale_coeffs: scale leaves no levels");
  pyr.validate();

  HaarPyramid out;
  out.global_approx = pyr.global_approx;
  out.details.resize(out_levels);
  for (int l = 0; l < out_levels; ++l) {
    if (l < pyr.levels()) {
      out.details[l] = pyr.details[l];
    } else {
      const int side = 1 << l;
      out.details[l] = {Grid::square(side), Grid::square(side), Grid::square(side)};
    }
  }
  return out;
}

}  // namespace inband
