#include "inband/haar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "inband/error.hpp"
#include "inband/kernels/kernels.hpp"

namespace inband {

void HaarPyramid::validate() const {
  for (int l = 0; l < levels(); ++l) {
    const int side = 1 << l;
    for (int o = 0; o < 3; ++o) {
      const Grid& p = details[l].plane(o);
      if (p.rows() != side || p.cols() != side)
        throw DimensionError("pyramid level " + std::to_string(l) + " plane is " + std::to_string(p.rows()) + "x" +
                             std::to_string(p.cols()) + ", expected " + std::to_string(side));
    }
  }
}

std::size_t SparseMask::count_true() const {
  std::size_t n = 0;
  for (const auto& lvl : levels)
    for (const auto& plane : lvl) n += static_cast<std::size_t>(std::count(plane.begin(), plane.end(), 1));
  return n;
}

SparseMask SparseMask::full(int levels) {
  SparseMask m;
  m.levels.resize(levels);
  for (int l = 0; l < levels; ++l) {
    const std::size_t n = std::size_t{1} << (2 * l);
    for (auto& plane : m.levels[l]) plane.assign(n, 1);
    m.retained += 3 * n;
  }
  return m;
}

HaarPyramid forward_haar(const ImageGrid& img) {
  const auto& k = kernels::active();
  const int n_levels = img.levels();
  HaarPyramid pyr;
  pyr.details.resize(n_levels);
  Grid current = img.grid();
  for (int l = n_levels - 1; l >= 0; --l) {
    const int side = 1 << l;
    Grid approx = Grid::square(side);
    DetailLevel& d = pyr.details[l];
    d.horizontal = Grid::square(side);
    d.vertical = Grid::square(side);
    d.diagonal = Grid::square(side);
    for (int i = 0; i < side; ++i) {
      k.haar_analyze_row(current.row(2 * i).data(), current.row(2 * i + 1).data(), static_cast<std::size_t>(side),
                         approx.row(i).data(), d.horizontal.row(i).data(), d.vertical.row(i).data(),
                         d.diagonal.row(i).data());
    }
    current = std::move(approx);
  }
  pyr.global_approx = current(0, 0);
  return pyr;
}

namespace {

Grid synthesize_to(const HaarPyramid& pyr, int level, double global) {
  const auto& k = kernels::active();
  Grid current = Grid::square(1, global);
  for (int l = 0; l < level; ++l) {
    const int side = 1 << l;
    const DetailLevel& d = pyr.details[l];
    Grid next = Grid::square(2 * side);
    for (int i = 0; i < side; ++i) {
      k.haar_synthesize_row(current.row(i).data(), d.horizontal.row(i).data(), d.vertical.row(i).data(),
                            d.diagonal.row(i).data(), static_cast<std::size_t>(side), next.row(2 * i).data(),
                            next.row(2 * i + 1).data());
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace

ImageGrid inverse_haar(const HaarPyramid& pyr) {
  pyr.validate();
  if (pyr.levels() < 1) throw DimensionError("inverse_haar: pyramid has no levels");
  return ImageGrid(synthesize_to(pyr, pyr.levels(), pyr.global_approx));
}

Grid approximation_at(const HaarPyramid& pyr, int level) {
  if (level < 0 || level > pyr.levels()) throw RangeError("approximation_at: level out of range");
  pyr.validate();
  return synthesize_to(pyr, level, pyr.global_approx);
}

DifferenceField compute_difference_field(const HaarPyramid& pyr, int level) {
  if (level < 0 || level > pyr.levels())
    throw RangeError("difference field level " + std::to_string(level) + " outside 0.." +
                     std::to_string(pyr.levels()));
  pyr.validate();
  Grid d = Grid::square(1, 0.0);
  for (int l = 1; l <= level; ++l) {
    const DetailLevel& parent = pyr.details[l - 1];
    const int side = 1 << l;
    Grid next = Grid::square(side);
    for (int pi = 0; pi < side / 2; ++pi) {
      for (int pj = 0; pj < side / 2; ++pj) {
        const double a = parent.horizontal(pi, pj);
        const double b = parent.vertical(pi, pj);
        const double c = parent.diagonal(pi, pj);
        const double base = d(pi, pj);
        const double x = a + b + c;
        const double y = -a + b - c;
        const double z = a - b - c;
        const double w = -a - b + c;
        next(2 * pi, 2 * pj) = base + x;
        next(2 * pi, 2 * pj + 1) = base + y;
        next(2 * pi + 1, 2 * pj) = base + z;
        next(2 * pi + 1, 2 * pj + 1) = base + w;
      }
    }
    d = std::move(next);
  }
  return {level, std::move(d)};
}

HaarPyramid combine(double alpha, const HaarPyramid& x, double beta, const HaarPyramid& y) {
  if (x.levels() != y.levels()) throw DimensionError("combine: pyramids differ in depth");
  HaarPyramid out = x;
  out.global_approx = alpha * x.global_approx + beta * y.global_approx;
  for (int l = 0; l < x.levels(); ++l)
    for (int o = 0; o < 3; ++o) {
      auto dst = out.details[l].plane(o).values();
      auto src = y.details[l].plane(o).values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = alpha * dst[i] + beta * src[i];
    }
  return out;
}

double universal_threshold(const HaarPyramid& pyr) {
  if (pyr.levels() < 1) throw DimensionError("universal_threshold: empty pyramid");
  auto finest = pyr.details.back().diagonal.values();
  std::vector<double> mags(finest.size());
  std::transform(finest.begin(), finest.end(), mags.begin(), [](double v) { return std::abs(v); });
  std::sort(mags.begin(), mags.end());
  const std::size_t n = mags.size();
  const double median = (n % 2 == 1) ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
  const double sigma = median / 0.6745;
  return sigma * std::sqrt(2.0 * std::log(static_cast<double>(pyr.detail_count())));
}

namespace {

struct CoeffRef {
  int level;
  int orientation;
  std::size_t index;
};

ThresholdResult keep_if(const HaarPyramid& pyr, double lambda) {
  ThresholdResult r{pyr, {}, lambda};
  r.mask.levels.resize(pyr.levels());
  for (int l = 0; l < pyr.levels(); ++l)
    for (int o = 0; o < 3; ++o) {
      auto vals = r.pyramid.details[l].plane(o).values();
      auto& flags = r.mask.levels[l][o];
      flags.assign(vals.size(), 0);
      for (std::size_t i = 0; i < vals.size(); ++i) {
        if (std::abs(vals[i]) >= lambda) {
          flags[i] = 1;
          ++r.mask.retained;
        } else {
          vals[i] = 0.0;
        }
      }
    }
  return r;
}

ThresholdResult keep_largest(const HaarPyramid& pyr, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("keep fraction must lie in [0, 1]");
  const std::size_t total = pyr.detail_count();
  const auto keep = std::min(total, static_cast<std::size_t>(std::ceil(p * static_cast<double>(total))));

  std::vector<CoeffRef> refs;
  refs.reserve(total);
  for (int l = 0; l < pyr.levels(); ++l)
    for (int o = 0; o < 3; ++o)
      for (std::size_t i = 0; i < pyr.details[l].plane(o).size(); ++i) refs.push_back({l, o, i});

  auto magnitude = [&](const CoeffRef& c) { return std::abs(pyr.details[c.level].plane(c.orientation).values()[c.index]); };
  // Ties break on pyramid order so the retained sets are nested in p.
  auto before = [&](const CoeffRef& x, const CoeffRef& y) {
    const double mx = magnitude(x), my = magnitude(y);
    if (mx != my) return mx > my;
    if (x.level != y.level) return x.level < y.level;
    if (x.orientation != y.orientation) return x.orientation < y.orientation;
    return x.index < y.index;
  };
  if (keep < refs.size()) std::nth_element(refs.begin(), refs.begin() + static_cast<std::ptrdiff_t>(keep), refs.end(), before);

  ThresholdResult r{pyr, {}, 0.0};
  r.mask.levels.resize(pyr.levels());
  for (int l = 0; l < pyr.levels(); ++l)
    for (int o = 0; o < 3; ++o) r.mask.levels[l][o].assign(pyr.details[l].plane(o).size(), 0);
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < keep; ++k) {
    const CoeffRef& c = refs[k];
    r.mask.levels[c.level][c.orientation][c.index] = 1;
    smallest = std::min(smallest, magnitude(c));
  }
  r.mask.retained = keep;
  for (int l = 0; l < pyr.levels(); ++l)
    for (int o = 0; o < 3; ++o) {
      auto vals = r.pyramid.details[l].plane(o).values();
      const auto& flags = r.mask.levels[l][o];
      for (std::size_t i = 0; i < vals.size(); ++i)
        if (flags[i] == 0) vals[i] = 0.0;
    }
  r.lambda = keep == 0 ? std::numeric_limits<double>::infinity() : smallest;
  return r;
}

}  // namespace

ThresholdResult hard_threshold(const HaarPyramid& pyr, const ThresholdMode& mode) {
  pyr.validate();
  return std::visit(
      [&](const auto& m) -> ThresholdResult {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, threshold::Universal>) {
          return keep_if(pyr, universal_threshold(pyr));
        } else if constexpr (std::is_same_v<M, threshold::KeepFraction>) {
          return keep_largest(pyr, m.p);
        } else {
          if (!(m.lambda >= 0.0)) throw ContractError("threshold must be non-negative");
          return keep_if(pyr, m.lambda);
        }
      },
      mode);
}

Subregion extract_pow2_subregion(const Grid& g) {
  const int shortest = std::min(g.rows(), g.cols());
  if (shortest < 2) throw DimensionError("image too small for a 2x2 subregion");
  int side = 1;
  while (side * 2 <= shortest) side *= 2;
  const int top = (g.rows() - side) / 2;
  const int left = (g.cols() - side) / 2;
  Grid crop = Grid::square(side);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) crop(i, j) = g(top + i, left + j);
  return {ImageGrid(std::move(crop)), top, left};
}

}  // namespace inband
