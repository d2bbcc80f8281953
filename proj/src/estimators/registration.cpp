#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "inband/error.hpp"
#include "inband/estimators.hpp"

namespace inband {

namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const EstimationError&) {
    throw;
  } catch (const DegenerateInputError& e) {
    throw EstimationError(name, e.what());
  }
}

std::vector<std::uint8_t> nonzero_locations(const Grid& a, const Grid& b) {
  std::vector<std::uint8_t> m(a.size());
  const auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = av[i] != 0.0 || bv[i] != 0.0;
  return m;
}

// Locations at least `margin` coefficients away from the border: a rectangle
// when unrotated, otherwise the inscribed disk shrunk by the margin.
Grid support_region(int side, int margin, bool disk) {
  Grid g = Grid::square(side);
  const double mid = 0.5 * (side - 1);
  const double r = 0.5 * side - margin;
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      const bool inside = disk ? (i - mid) * (i - mid) + (j - mid) * (j - mid) <= r * r
                               : std::min({i, j, side - 1 - i, side - 1 - j}) >= margin;
      if (inside) g(i, j) = 1.0;
    }
  return g;
}

Grid apply_mask(Grid g, const Grid& mask) {
  auto v = g.values();
  const auto m = mask.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= m[i];
  return g;
}

}  // namespace

RegistrationReport register_pyramids(const HaarPyramid& ref, const HaarPyramid& sen, const RegistrationConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  ref.validate();
  sen.validate();
  if (ref.levels() < 2 || sen.levels() < 2) throw DimensionError("registration needs images of side >= 4");
  RegistrationReport report;
  const int n = ref.levels();

  const ThresholdResult tr = stage("threshold", [&] { return hard_threshold(ref, config.threshold); });
  const ThresholdResult ts = stage("threshold", [&] { return hard_threshold(sen, config.threshold); });

  // Scale.
  double sigma = 1.0;
  if (config.estimate_scale) {
    const ScaleEstimate se = stage("scale", [&] { return estimate_scale(tr.pyramid, tr.mask, ts.pyramid, ts.mask, config.scale); });
    sigma = se.snapped;
    report.raw_scale = se.raw;
  }
  int p = static_cast<int>(std::lround(std::log2(sigma)));
  const int p_sides = sen.levels() - n;
  if (p != p_sides && config.estimate_scale &&
      std::abs(std::log2(report.raw_scale) - p_sides) < config.scale_tolerance_octaves) {
    p = p_sides;
    sigma = std::ldexp(1.0, p);
  }
  if (sen.levels() - p != n)
    throw EstimationError("scale", "estimated scale " + std::to_string(sigma) + " is inconsistent with image sides " +
                                       std::to_string(ref.side()) + " and " + std::to_string(sen.side()));
  const HaarPyramid sen_aligned = rescale_coeffs(sen, sigma);
  const HaarPyramid sen_thr_aligned = rescale_coeffs(ts.pyramid, sigma);
  const int finest_valid = std::min(n, sen.levels()) - 1;

  const DifferenceField d = compute_difference_field(ref, n);
  const int lr = std::max(1, finest_valid - config.rotation_levels_above_finest);
  const DetailLevel& raw_ref = ref.details[lr];
  const DetailLevel& raw_sen = sen_aligned.details[lr];

  // Rotation, first pass.
  double theta = 0.0;
  if (config.estimate_rotation) {
    const DetailLevel& rl = tr.pyramid.details[lr];
    const DetailLevel& sl = sen_thr_aligned.details[lr];
    const RotationRefinement rr = stage("rotation", [&] {
      // Thresholding picks the locations; slopes come from the coefficient pairs themselves so that a
      // channel zeroed by the threshold does not pin the angle to an axis.
      const SlopeHistogram h_ref = wavelet_slope_histogram(raw_ref.horizontal, raw_ref.vertical,
                                                           nonzero_locations(rl.horizontal, rl.vertical), config.bins,
                                                           config.weighting);
      const SlopeHistogram h_sen = wavelet_slope_histogram(raw_sen.horizontal, raw_sen.vertical,
                                                           nonzero_locations(sl.horizontal, sl.vertical), config.bins,
                                                           config.weighting);
      RotationRefinement best{0.0, std::numeric_limits<double>::infinity()};
      for (double candidate : rotation_candidates(h_ref, h_sen, config.rotation_candidates)) {
        const RotationRefinement r = refine_rotation({raw_ref.horizontal, raw_ref.vertical},
                                                     {raw_sen.horizontal, raw_sen.vertical}, candidate, config.refine);
        if (r.residual < best.residual) {
          best = r;
          report.initial_theta_deg = candidate;
        }
      }
      return best;
    });
    theta = rr.theta_deg;
    report.first_theta_deg = theta;
  }

  // Translation.
  // De-rotated planes lose detail at coarser levels, so rotated pairs compare
  // at the finest valid level.
  const int k_rule = config.k                                ? *config.k
                     : (sigma < 1.0 || (theta != 0.0 && config.rotated_finest)) ? 1
                                                               : static_cast<int>(std::lround(sigma)) + 1;
  const int k = n - (finest_valid + 1 - k_rule);
  if (k < 1 || k > n) throw RangeError("registration: reduction level " + std::to_string(k_rule) + " out of range");
  report.k = k;
  const DetailLevel& cl = sen_aligned.details[n - k];
  BnBConfig bnb = config.bnb;
  bnb.k = k;
  auto planes = [&](double angle) {
    const int side = cl.horizontal.rows();
    const int margin = std::min(config.translation_margin, side / 4);
    CoeffPlanes sensed{cl.horizontal, cl.vertical};
    std::optional<Grid> support;
    if (angle != 0.0) {
      sensed = rotate_coeff_planes(cl.horizontal, cl.vertical, -angle);
      support = support_region(side, margin, true);
    } else if (margin > 0) {
      support = support_region(side, margin, false);
    }
    if (config.sensed_support) {
      // Only where the sensed planes carry coefficients.
      Grid m = support ? *support : Grid(side, side, 1.0);
      const auto av = sensed.a.values(), bv = sensed.b.values();
      auto mv = m.values();
      for (std::size_t i = 0; i < mv.size(); ++i)
        if (av[i] == 0.0 && bv[i] == 0.0) mv[i] = 0.0;
      support = std::move(m);
    }
    SensedPlanes sp{gaussian_blur(sensed.a, config.translation_smoothing),
                    gaussian_blur(sensed.b, config.translation_smoothing), std::move(support),
                    config.translation_smoothing, std::nullopt};
    if (sp.support) {
      sp.a = apply_mask(std::move(sp.a), *sp.support);
      sp.b = apply_mask(std::move(sp.b), *sp.support);
    }
    if (angle != 0.0 && config.round_trip_reference) sp.round_trip_deg = angle;
    return sp;
  };
  report.translation = stage("translation", [&] { return estimate_translation_bnb(d, planes(theta), bnb); });
  if (theta != 0.0 && config.zero_angle_hypothesis) {
    // A pure translation also moves the residual minimum off zero.
    const TranslationEstimate t0 = stage("translation", [&] { return estimate_translation_bnb(d, planes(0.0), bnb); });
    if (t0.score >= report.translation.score) {
      report.translation = t0;
      theta = 0.0;
    }
  }

  // Joint polish: alternate a fine angle line search at the current shift with
  // a lattice hill-climb of the shift at the current angle, both on the
  // translation score.
  if (config.estimate_rotation && config.joint.rounds > 0 && report.translation.score <= bnb.tau) {
    const JointPolishConfig& jp = config.joint;
    const double delta = std::ldexp(1.0, -bnb.h_max);
    TranslationEstimate& t = report.translation;
    stage("translation", [&] {
      for (int round = 0; round < jp.rounds; ++round) {
        bool moved = false;
        const int steps = static_cast<int>(std::lround(jp.half_range_deg / jp.step_deg));
        double best_theta = theta;
        for (int m = -steps; m <= steps; ++m) {
          if (m == 0) continue;
          // Snapped to the step so that zero stays exactly zero.
          const double angle = std::round(theta / jp.step_deg + m) * jp.step_deg;
          const double v = translation_score(d, planes(angle), t.tx, t.ty, k, bnb.h_max);
          if (v > t.score) t.score = v, best_theta = angle;
        }
        if (best_theta != theta) theta = best_theta, moved = true;
        const SensedPlanes sp = planes(theta);
        for (int climb = 0; climb < 64; ++climb) {
          double bx = t.tx, by = t.ty, bs = t.score;
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const double x = t.tx + dx * delta, y = t.ty + dy * delta;
              if ((dx == 0 && dy == 0) || std::abs(x) > 1.0 || std::abs(y) > 1.0) continue;
              const double v = translation_score(d, sp, x, y, k, bnb.h_max);
              if (v > bs) bx = x, by = y, bs = v;
            }
          if (bs <= t.score) break;
          t.tx = bx, t.ty = by, t.score = bs, moved = true;
        }
        if (!moved) break;
      }
      return 0;
    });
  }

  report.params = {sigma, normalize_angle(theta), report.translation.tx, report.translation.ty};
  report.ncc = report.translation.score;
  report.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

RegistrationReport register_similarity(const ImageGrid& ref, const ImageGrid& sen, const RegistrationConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  RegistrationReport r = register_pyramids(forward_haar(ref), forward_haar(sen), config);
  r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace inband
