#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

#include "inband/error.hpp"
#include "inband/estimators.hpp"
#include "inband/kernels/kernels.hpp"

namespace inband {

namespace {

double normalized_term(const Grid& x, const Grid& y, const char* which) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw DimensionError("ncc_score: plane shapes differ");
  const auto d = kernels::active().dot3(x.values(), y.values());
  if (d.xx == 0.0 || d.yy == 0.0) throw DegenerateInputError(std::string("ncc_score: zero-norm ") + which + " plane");
  return d.xy / std::sqrt(d.xx * d.yy);
}

Grid masked(const Grid& g, const Grid& mask) {
  Grid out = g;
  auto v = out.values();
  const auto m = mask.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= m[i];
  return out;
}

}  // namespace

double ncc_score(const Grid& a_ref, const Grid& b_ref, const Grid& a_sen, const Grid& b_sen) {
  const double s = normalized_term(a_ref, a_sen, "horizontal") + normalized_term(b_ref, b_sen, "vertical");
  return std::clamp(s, -2.0, 2.0);
}

double translation_score(const DifferenceField& ref, const SensedPlanes& sen, double tx, double ty, int k, int h_max) {
  // Sensed = reference moved by t, i.e. sampled at offset -t.
  const DyadicShift sx = quantize_shift(-tx, h_max, Axis::horizontal);
  const DyadicShift sy = quantize_shift(-ty, h_max, Axis::vertical);
  const int h = std::max(sx.added_levels, sy.added_levels);
  const ShiftedDetailPair pair = shifted_detail_pair(ref, sx, sy, k + h);
  if (pair.horizontal.values.rows() != sen.a.rows() || pair.vertical.values.rows() != sen.b.rows())
    throw DimensionError("translation_score: sensed planes do not sit at level N - k");
  Grid a = gaussian_blur(pair.horizontal.values, sen.smoothing);
  Grid b = gaussian_blur(pair.vertical.values, sen.smoothing);
  if (sen.round_trip_deg) {
    const CoeffPlanes there = rotate_coeff_planes(a, b, *sen.round_trip_deg);
    CoeffPlanes back = rotate_coeff_planes(there.a, there.b, -*sen.round_trip_deg);
    a = std::move(back.a);
    b = std::move(back.b);
  }
  if (sen.support) return ncc_score(masked(a, *sen.support), masked(b, *sen.support), sen.a, sen.b);
  return ncc_score(a, b, sen.a, sen.b);
}

TranslationEstimate estimate_translation_bnb(const DifferenceField& ref, const SensedPlanes& sen,
                                             const BnBConfig& config) {
  if (!(config.tau > 0.0 && config.tau <= 2.0)) throw RangeError("BnB: tau must lie in (0, 2]");
  if (config.h_max < 1 || config.h_max > 20) throw RangeError("BnB: h_max must lie in 1..20");
  if (config.k < 1 || config.k > ref.level) throw RangeError("BnB: k must lie in 1.." + std::to_string(ref.level));
  if (config.max_iterations < 1) throw RangeError("BnB: iteration cap must be positive");
  const int side = 1 << (ref.level - config.k);
  if (sen.a.rows() != side || sen.b.rows() != side || !sen.a.is_square() || !sen.b.is_square())
    throw DimensionError("BnB: sensed planes must be " + std::to_string(side) + " square");

  const double lattice = std::ldexp(1.0, config.h_max);
  const double delta = 1.0 / lattice;
  const double eps = config.epsilon > 0.0 ? config.epsilon : 0.5 * delta;

  TranslationEstimate out;
  std::map<std::pair<long long, long long>, double> cache;
  auto score = [&](double x, double y) {
    const std::pair<long long, long long> key{std::llround(x * lattice), std::llround(y * lattice)};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    ++out.evaluations;
    const double s = translation_score(ref, sen, x, y, config.k, config.h_max);
    cache.emplace(key, s);
    return s;
  };

  // Steepest ascent over the 8 lattice neighbours, bounded by the search square.
  auto polish = [&](TranslationEstimate& e) {
    for (int step = 0; step < 4 * static_cast<int>(lattice) && e.score <= config.tau; ++step) {
      double bx = e.tx, by = e.ty, bs = e.score;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const double x = e.tx + dx * delta, y = e.ty + dy * delta;
          if ((dx == 0 && dy == 0) || std::abs(x) > 1.0 || std::abs(y) > 1.0) continue;
          const double v = score(x, y);
          if (v > bs) bx = x, by = y, bs = v;
        }
      if (bs <= e.score) break;
      e.tx = bx;
      e.ty = by;
      e.score = bs;
      ++e.polish_steps;
    }
  };

  struct Corner {
    double x, y, s;
  };
  struct Pending {
    double cx, cy, r, key;
  };
  Corner best_seen{0.0, 0.0, -3.0};
  std::vector<Pending> pending;
  int iteration = 0;
  out.score = -3.0;
  auto at = [](double x, double y, double s, bool converged) {
    TranslationEstimate e;
    e.tx = x, e.ty = y, e.score = s, e.converged = converged;
    return e;
  };

  // One descent from the square centred on (cx, cy) with half-width r. Returns
  // true once a score above tau is found.
  auto descend = [&](double cx, double cy, double r, bool restart) {
    std::vector<std::pair<double, double>> slides;
    TranslationEstimate e;
    e.score = -3.0;
    int splits = 0;
    for (int local = 0; local < config.max_iterations; ++local) {
      ++iteration;
      std::array<Corner, 4> c{{{cx - r, cy - r, 0}, {cx + r, cy - r, 0}, {cx - r, cy + r, 0}, {cx + r, cy + r, 0}}};
      for (auto& corner : c) corner.s = score(corner.x, corner.y);
      std::stable_sort(c.begin(), c.end(), [](const Corner& p, const Corner& q) { return p.s > q.s; });
      if (c[0].s > best_seen.s) best_seen = c[0];

      BnBState st;
      st.low_x = cx - r;
      st.high_x = cx + r;
      st.low_y = cy - r;
      st.high_y = cy + r;
      st.iteration = iteration;
      st.restart = restart;
      restart = false;
      st.best_score = c[0].s;
      st.best_x = c[0].x;
      st.best_y = c[0].y;
      st.second_score = c[1].s;
      st.second_x = c[1].x;
      st.second_y = c[1].y;

      if (c[0].s > config.tau) {
        st.recent_centers = slides;
        out.trace.push_back(st);
        e = at(c[0].x, c[0].y, c[0].s, true);
        break;
      }

      if (2.0 * r > delta * 1.5 && splits <= config.h_max) {
        // Halve towards the quadrant holding the best corner. With probing, the
        // edge midpoints and the centre compete too; the quadrant holding the
        // best of the nine points wins, ties going to the larger corner sum.
        double g[3][3];
        Corner top = c[0];
        if (config.probe_midpoints) {
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
              const double x = cx + (j - 1) * r, y = cy + (i - 1) * r;
              g[i][j] = score(x, y);
              if (g[i][j] > top.s) top = {x, y, g[i][j]};
            }
          if (top.s > best_seen.s) best_seen = top;
          if (top.s > config.tau) {
            st.best_score = top.s, st.best_x = top.x, st.best_y = top.y;
            st.recent_centers = slides;
            out.trace.push_back(st);
            e = at(top.x, top.y, top.s, true);
            break;
          }
        } else {
          // Only the corners are known.
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) g[i][j] = -3.0;
          for (const auto& corner : c) {
            const int i = corner.y < cy ? 0 : 2, j = corner.x < cx ? 0 : 2;
            g[i][j] = corner.s;
          }
        }
        const int ti = static_cast<int>(std::lround((top.y - cy) / r)) + 1;
        const int tj = static_cast<int>(std::lround((top.x - cx) / r)) + 1;
        int qi = -1, qj = -1;
        double best_sum = -1e300;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            if (ti < i || ti > i + 1 || tj < j || tj > j + 1) continue;
            const double sum = g[i][j] + g[i][j + 1] + g[i + 1][j] + g[i + 1][j + 1];
            if (sum > best_sum) best_sum = sum, qi = i, qj = j;
          }
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            if (i == qi && j == qj) continue;
            const double key = std::max({g[i][j], g[i][j + 1], g[i + 1][j], g[i + 1][j + 1]});
            pending.push_back({cx + (j - 0.5) * r, cy + (i - 0.5) * r, 0.5 * r, key});
          }
        cx += (qj - 0.5) * r;
        cy += (qi - 0.5) * r;
        r *= 0.5;
        ++splits;
        ++out.splits;
        st.split = true;
        out.trace.push_back(st);
        continue;
      }

      // Lattice resolution reached: move the square across its best corner and
      // stop once the centre keeps bouncing between the same two positions.
      slides.emplace_back(cx, cy);
      if (slides.size() > 4) slides.erase(slides.begin());
      st.recent_centers = slides;
      out.trace.push_back(st);
      if (slides.size() == 4) {
        auto near = [eps](const std::pair<double, double>& p, const std::pair<double, double>& q) {
          return std::abs(p.first - q.first) <= eps && std::abs(p.second - q.second) <= eps;
        };
        if (near(slides[3], slides[1]) && near(slides[2], slides[0]) && !near(slides[3], slides[2])) {
          e.tx = 0.5 * (slides[3].first + slides[2].first);
          e.ty = 0.5 * (slides[3].second + slides[2].second);
          e.score = score(e.tx, e.ty);
          e.converged = true;
          break;
        }
      }
      // Reflected across the best corner, kept inside the search square.
      cx = std::clamp(2.0 * c[0].x - cx, -1.0 + r, 1.0 - r);
      cy = std::clamp(2.0 * c[0].y - cy, -1.0 + r, 1.0 - r);
    }
    if (!e.converged) e = at(best_seen.x, best_seen.y, best_seen.s, false);
    if (config.polish) polish(e);
    out.polish_steps += e.polish_steps;
    if (e.score > out.score) out.tx = e.tx, out.ty = e.ty, out.score = e.score;
    out.converged = out.converged || e.converged;
    return out.score > config.tau;
  };

  bool found = descend(0.0, 0.0, 1.0, false);
  // Backtracking: rectangles passed over during a descent are revisited,
  // most promising first, until tau is exceeded or the budget runs out.
  while (!found && !pending.empty() && out.evaluations < config.max_evaluations) {
    const auto it = std::max_element(pending.begin(), pending.end(),
                                      [](const Pending& p, const Pending& q) { return p.key < q.key; });
    const Pending next = *it;
    pending.erase(it);
    found = descend(next.cx, next.cy, next.r, true);
    ++out.restarts;
  }
  out.iterations = iteration;
  return out;
}

}  // namespace inband
