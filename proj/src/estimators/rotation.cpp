#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "inband/error.hpp"
#include "inband/estimators.hpp"

namespace inband {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void require_same_shape(const Grid& a, const Grid& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError(std::string(what) + ": plane shapes differ");
}

double bilinear_or_zero(const Grid& g, double y, double x) {
  const int n = g.rows();
  if (x < 0.0 || y < 0.0 || x > n - 1 || y > n - 1) return 0.0;
  const int i0 = std::min(static_cast<int>(y), n - 2 < 0 ? 0 : n - 2);
  const int j0 = std::min(static_cast<int>(x), n - 2 < 0 ? 0 : n - 2);
  if (n == 1) return g(0, 0);
  const double fy = y - i0, fx = x - j0;
  return (1 - fy) * ((1 - fx) * g(i0, j0) + fx * g(i0, j0 + 1)) + fy * ((1 - fx) * g(i0 + 1, j0) + fx * g(i0 + 1, j0 + 1));
}

}  // namespace

double normalize_angle(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r <= -180.0) r += 360.0;
  if (r > 180.0) r -= 360.0;
  return r;
}

int SlopeHistogram::bin_of(double angle_deg) const noexcept {
  const long b = std::lround((angle_deg + 90.0) / bin_width()) - 1;
  return static_cast<int>(pos_mod(b, bins));
}

std::vector<std::uint8_t> location_mask(const SparseMask& mask, int level) {
  if (level < 0 || level >= static_cast<int>(mask.levels.size())) throw RangeError("location_mask: level out of range");
  const auto& a = mask.levels[level][0];
  const auto& b = mask.levels[level][1];
  std::vector<std::uint8_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] | b[i]) != 0;
  return out;
}

SlopeHistogram wavelet_slope_histogram(const Grid& a, const Grid& b, std::span<const std::uint8_t> retained, int bins,
                                       SlopeWeighting weighting) {
  require_same_shape(a, b, "wavelet_slope_histogram");
  if (bins < 2) throw RangeError("wavelet_slope_histogram: need at least 2 bins");
  if (!retained.empty() && retained.size() != a.size())
    throw DimensionError("wavelet_slope_histogram: mask size differs from plane size");
  SlopeHistogram h{bins, std::vector<double>(static_cast<std::size_t>(bins), 0.0)};
  const auto av = a.values();
  const auto bv = b.values();
  std::size_t used = 0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (!retained.empty() && retained[i] == 0) continue;
    if (av[i] == 0.0 && bv[i] == 0.0) continue;
    // arctan(b / a) folded into (-90, 90].
    double angle = std::atan2(bv[i], av[i]) / kDeg;
    if (angle <= -90.0) angle += 180.0;
    if (angle > 90.0) angle -= 180.0;
    const double w = weighting == SlopeWeighting::count ? 1.0 : std::hypot(av[i], bv[i]);
    h.counts[static_cast<std::size_t>(h.bin_of(angle))] += w;
    ++used;
  }
  if (used == 0) throw DegenerateInputError("wavelet_slope_histogram: no retained nonzero coefficients");
  return h;
}

std::vector<double> rotation_candidates(const SlopeHistogram& h_ref, const SlopeHistogram& h_sen, int count) {
  if (h_ref.bins != h_sen.bins || h_ref.bins < 2) throw DimensionError("slope histograms differ in bin count");
  if (count < 1) throw RangeError("rotation_candidates: count must be positive");
  const int n = h_ref.bins;
  auto nonzero = [](const SlopeHistogram& h) {
    return std::any_of(h.counts.begin(), h.counts.end(), [](double c) { return c != 0.0; });
  };
  if (!nonzero(h_ref) || !nonzero(h_sen)) throw DegenerateInputError("slope histogram is empty");

  std::vector<double> corr(n, 0.0);
  for (int lag = 0; lag < n; ++lag)
    for (int b = 0; b < n; ++b) corr[lag] += h_ref.counts[b] * h_sen.counts[(b + lag) % n];

  // Circular local maxima, strongest first; the global argmax (lowest lag on ties) leads.
  std::vector<int> peaks;
  for (int lag = 0; lag < n; ++lag) {
    const double l = corr[(lag + n - 1) % n], r = corr[(lag + 1) % n];
    if (corr[lag] >= l && corr[lag] >= r) peaks.push_back(lag);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](int p, int q) { return corr[p] > corr[q]; });
  if (static_cast<int>(peaks.size()) > count) peaks.resize(count);

  std::vector<double> out;
  for (int lag : peaks) {
    double angle = lag * h_ref.bin_width();
    if (angle > 90.0) angle -= 180.0;
    out.push_back(angle);
  }
  return out;
}

double estimate_rotation_initial(const SlopeHistogram& h_ref, const SlopeHistogram& h_sen) {
  return rotation_candidates(h_ref, h_sen, 1).front();
}

CoeffPlanes rotate_coeff_planes(const Grid& a, const Grid& b, double theta_deg) {
  require_same_shape(a, b, "rotate_coeff_planes");
  if (!a.is_square()) throw DimensionError("rotate_coeff_planes: planes must be square");
  const int n = a.rows();
  const double t = normalize_angle(theta_deg);
  // Exact quarter turns avoid interpolation round-off.
  double c = std::cos(t * kDeg), s = std::sin(t * kDeg);
  if (t == 90.0) c = 0.0, s = 1.0;
  if (t == -90.0) c = 0.0, s = -1.0;
  if (t == 180.0) c = -1.0, s = 0.0;
  if (t == 0.0) c = 1.0, s = 0.0;

  const double mid = 0.5 * (n - 1);
  CoeffPlanes out{Grid::square(n), Grid::square(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double qx = j - mid, qy = i - mid;
      // Source position p = R^-1 q.
      const double px = c * qx + s * qy + mid;
      const double py = -s * qx + c * qy + mid;
      const double av = bilinear_or_zero(a, py, px);
      const double bv = bilinear_or_zero(b, py, px);
      out.a(i, j) = c * av - s * bv;
      out.b(i, j) = s * av + c * bv;
    }
  }
  return out;
}

Grid support_disk(int side) {
  Grid g = Grid::square(side);
  const double mid = 0.5 * (side - 1);
  const double r2 = (0.5 * side) * (0.5 * side);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j)
      if ((i - mid) * (i - mid) + (j - mid) * (j - mid) <= r2) g(i, j) = 1.0;
  return g;
}

namespace {

double disk_residual(const CoeffPlanes& ref, const CoeffPlanes& sen, const Grid& disk, double theta_deg,
                     bool symmetric) {
  // Symmetric mode resamples both sides by half the angle so that neither is
  // favoured by escaping interpolation blur near zero.
  const CoeffPlanes r = rotate_coeff_planes(ref.a, ref.b, symmetric ? 0.5 * theta_deg : theta_deg);
  const CoeffPlanes s = symmetric ? rotate_coeff_planes(sen.a, sen.b, -0.5 * theta_deg) : CoeffPlanes{sen.a, sen.b};
  double ea = 0.0, eb = 0.0;
  const auto w = disk.values();
  const auto ra = r.a.values(), rb = r.b.values(), sa = s.a.values(), sb = s.b.values();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    ea += (sa[i] - ra[i]) * (sa[i] - ra[i]);
    eb += (sb[i] - rb[i]) * (sb[i] - rb[i]);
  }
  return std::sqrt(ea) + std::sqrt(eb);
}

}  // namespace

RotationRefinement refine_rotation(const CoeffPlanes& ref, const CoeffPlanes& sen, double theta0_deg,
                                   const RefineConfig& config) {
  require_same_shape(ref.a, sen.a, "refine_rotation");
  require_same_shape(ref.b, sen.b, "refine_rotation");
  require_same_shape(ref.a, ref.b, "refine_rotation");
  if (!(config.step_deg > 0.0) || config.half_range_deg < 0.0) throw RangeError("refine_rotation: bad search grid");
  const Grid disk = support_disk(ref.a.rows());

  const int steps = static_cast<int>(std::lround(config.half_range_deg / config.step_deg));
  auto search = [&](double centre) {
    RotationRefinement best{centre, std::numeric_limits<double>::infinity()};
    for (int m = -steps; m <= steps; ++m) {
      // Grid points are snapped to the step so results print cleanly.
      const double theta = std::round((centre + m * config.step_deg) / config.step_deg) * config.step_deg;
      const double r = disk_residual(ref, sen, disk, theta, config.symmetric);
      if (r < best.residual) best = {theta, r};
    }
    return best;
  };
  RotationRefinement best = search(theta0_deg);
  if (config.resolve_half_turn) {
    // The twin gets its own search: the first minimum may be spurious.
    const RotationRefinement twin = search(best.theta_deg + 180.0);
    if (twin.residual < best.residual) best = twin;
  }
  best.theta_deg = normalize_angle(best.theta_deg);
  return best;
}

}  // namespace inband
