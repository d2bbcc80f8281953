#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "inband/error.hpp"
#include "inband/sim/harness.hpp"

namespace inband::sim {

namespace {

constexpr double kPi = std::numbers::pi;

// Smooth lattice noise in [0, 1] with one random value per lattice node.
class ValueNoise {
 public:
  ValueNoise(int cells, std::mt19937_64& rng) : cells_(cells), values_(static_cast<std::size_t>(cells + 1) * (cells + 1)) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (double& v : values_) v = d(rng);
  }

  double operator()(double u, double v) const {
    const double x = std::clamp(u, 0.0, 1.0) * cells_, y = std::clamp(v, 0.0, 1.0) * cells_;
    const int i = std::min(static_cast<int>(y), cells_ - 1), j = std::min(static_cast<int>(x), cells_ - 1);
    const double fy = fade(y - i), fx = fade(x - j);
    auto at = [&](int r, int c) { return values_[static_cast<std::size_t>(r) * (cells_ + 1) + c]; };
    return (1 - fy) * ((1 - fx) * at(i, j) + fx * at(i, j + 1)) + fy * ((1 - fx) * at(i + 1, j) + fx * at(i + 1, j + 1));
  }

 private:
  static double fade(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }
  int cells_;
  std::vector<double> values_;
};

class Fractal {
 public:
  Fractal(int base_cells, int octaves, std::mt19937_64& rng) {
    for (int o = 0; o < octaves; ++o) layers_.emplace_back(base_cells << o, rng);
  }
  double operator()(double u, double v) const {
    double s = 0.0, amp = 1.0, norm = 0.0;
    for (const auto& l : layers_) {
      s += amp * l(u, v);
      norm += amp;
      amp *= 0.55;
    }
    return s / norm;
  }

 private:
  std::vector<ValueNoise> layers_;
};

// Coverage of a region with signed distance `d` (negative inside), edge width w.
double coverage(double d, double w) { return 1.0 / (1.0 + std::exp(d / w)); }

double ellipse_distance(double u, double v, double cu, double cv, double ru, double rv, double angle = 0.0) {
  const double c = std::cos(angle), s = std::sin(angle);
  const double x = c * (u - cu) + s * (v - cv), y = -s * (u - cu) + c * (v - cv);
  const double q = std::sqrt((x / ru) * (x / ru) + (y / rv) * (y / rv));
  return (q - 1.0) * std::min(ru, rv);
}

double box_distance(double u, double v, double cu, double cv, double hu, double hv, double angle = 0.0) {
  const double c = std::cos(angle), s = std::sin(angle);
  const double x = std::abs(c * (u - cu) + s * (v - cv)) - hu, y = std::abs(-s * (u - cu) + c * (v - cv)) - hv;
  const double outside = std::hypot(std::max(x, 0.0), std::max(y, 0.0));
  return outside + std::min(std::max(x, y), 0.0);
}

double polygon_distance(double u, double v, double cu, double cv, double radius, int sides, double angle) {
  // Convex regular polygon: max over edge half-planes.
  double d = -1e9;
  const double apothem = radius * std::cos(kPi / sides);
  for (int e = 0; e < sides; ++e) {
    const double a = angle + (2.0 * e + 1.0) * kPi / sides;
    d = std::max(d, std::cos(a) * (u - cu) + std::sin(a) * (v - cv) - apothem);
  }
  return d;
}

double segment_distance(double u, double v, double u0, double v0, double u1, double v1, double half_width) {
  const double du = u1 - u0, dv = v1 - v0;
  const double t = std::clamp(((u - u0) * du + (v - v0) * dv) / (du * du + dv * dv), 0.0, 1.0);
  return std::hypot(u - u0 - t * du, v - v0 - t * dv) - half_width;
}

using Painter = std::function<double(double, double)>;

Grid render(int side, const Painter& f) {
  Grid g = Grid::square(side);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) g(i, j) = std::clamp(f((j + 0.5) / side, (i + 0.5) / side), 0.0, 255.0);
  return g;
}

Grid portrait(int side, std::mt19937_64& rng) {
  const double w = 1.5 / side;
  Fractal skin(6, 3, rng), hair(24, 3, rng), back(4, 2, rng);
  return render(side, [&](double u, double v) {
    double val = 70.0 + 60.0 * u + 40.0 * back(u, v);
    const double shoulders = coverage(ellipse_distance(u, v, 0.5, 1.05, 0.42, 0.3), w);
    val += shoulders * (110.0 - val + 30.0 * std::sin(18.0 * u + 7.0 * v));
    const double hair_mask = coverage(ellipse_distance(u, v, 0.5, 0.38, 0.27, 0.3), w);
    val += hair_mask * (45.0 + 50.0 * hair(u, v) + 15.0 * std::sin(90.0 * u + 20.0 * v) - val);
    const double face = coverage(ellipse_distance(u, v, 0.5, 0.47, 0.19, 0.25), w);
    val += face * (185.0 + 30.0 * skin(u, v) - 35.0 * (v - 0.47) - val);
    for (double eu : {0.43, 0.57}) {
      const double eye = coverage(ellipse_distance(u, v, eu, 0.42, 0.035, 0.018), w);
      val += eye * (40.0 - val);
    }
    const double mouth = coverage(ellipse_distance(u, v, 0.5, 0.6, 0.06, 0.014), w);
    val += mouth * (110.0 - val);
    const double nose = coverage(segment_distance(u, v, 0.5, 0.45, 0.49, 0.53, 0.008), w);
    val -= 35.0 * nose;
    const double brim = coverage(ellipse_distance(u, v, 0.35, 0.18, 0.3, 0.06, -0.35), w);
    val += brim * (150.0 + 40.0 * std::sin(60.0 * (u + v)) - val);
    return val;
  });
}

Grid cameraman(int side, std::mt19937_64& rng) {
  const double w = 1.5 / side;
  Fractal grass(16, 3, rng), sky(3, 2, rng);
  return render(side, [&](double u, double v) {
    double val = 205.0 - 40.0 * v + 12.0 * sky(u, v);
    const double ground = coverage(0.62 - v + 0.02 * std::sin(9.0 * u), w);
    val += ground * (95.0 + 70.0 * grass(u, v) - val);
    for (int b = 0; b < 5; ++b) {
      const double bu = 0.08 + 0.09 * b, bh = 0.05 + 0.025 * ((b * 7) % 3);
      const double bld = coverage(box_distance(u, v, bu, 0.6 - bh, 0.035, bh), w);
      val += bld * (150.0 + 12.0 * b - val);
    }
    const double coat = coverage(box_distance(u, v, 0.62, 0.56, 0.09, 0.2, 0.05), w);
    val += coat * (25.0 + 15.0 * grass(u * 0.5, v) - val);
    const double head = coverage(ellipse_distance(u, v, 0.6, 0.28, 0.055, 0.07), w);
    val += head * (50.0 - val);
    const double camera = coverage(box_distance(u, v, 0.5, 0.33, 0.05, 0.035), w);
    val += camera * (20.0 - val);
    const double lens = coverage(ellipse_distance(u, v, 0.44, 0.33, 0.018, 0.018), w);
    val += lens * (200.0 - val);
    for (double foot : {0.38, 0.52, 0.63}) {
      const double leg = coverage(segment_distance(u, v, 0.5, 0.37, foot, 0.93, 0.006), w);
      val += leg * (30.0 - val);
    }
    return val;
  });
}

Grid pentagon(int side, std::mt19937_64& rng) {
  const double w = 1.5 / side;
  Fractal tex(8, 5, rng), fine(48, 2, rng);
  return render(side, [&](double u, double v) {
    double val = 60.0 + 120.0 * tex(u, v) + 30.0 * (fine(u, v) - 0.5);
    for (int road = 0; road < 5; ++road) {
      const double a = 0.3 + road * 2.0 * kPi / 5.0;
      const double r = coverage(segment_distance(u, v, 0.5, 0.5, 0.5 + 0.7 * std::cos(a), 0.5 + 0.7 * std::sin(a), 0.008), w);
      val += r * (210.0 - val);
    }
    const double outer = polygon_distance(u, v, 0.5, 0.5, 0.3, 5, 0.3);
    const double inner = polygon_distance(u, v, 0.5, 0.5, 0.12, 5, 0.3);
    const double ring = coverage(outer, w) * (1.0 - coverage(inner, w));
    const double rings = 0.5 + 0.5 * std::cos(2.0 * kPi * (outer / 0.036));
    val += ring * (120.0 + 90.0 * rings - val);
    const double court = coverage(inner, w);
    val += court * (90.0 + 60.0 * fine(u, v) - val);
    return val;
  });
}

Grid blobs(int side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.05, 0.95), rad(0.03, 0.09), amp(-90.0, 90.0);
  struct Blob {
    double u, v, r, a;
  };
  std::vector<Blob> bs(40);
  for (auto& b : bs) b = {pos(rng), pos(rng), rad(rng), amp(rng)};
  return render(side, [&](double u, double v) {
    double val = 128.0;
    for (const auto& b : bs) val += b.a * std::exp(-((u - b.u) * (u - b.u) + (v - b.v) * (v - b.v)) / (2 * b.r * b.r));
    return val;
  });
}

Grid rings(int side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.15, 0.85), lam(0.04, 0.1);
  struct Source {
    double u, v, l;
  };
  std::vector<Source> src(4);
  for (auto& s : src) s = {pos(rng), pos(rng), lam(rng)};
  return render(side, [&](double u, double v) {
    double val = 128.0;
    for (const auto& s : src) {
      const double r = std::hypot(u - s.u, v - s.v);
      val += 28.0 * std::cos(2.0 * kPi * r / s.l) * std::exp(-r * r / 0.08);
    }
    return val;
  });
}

Grid tiles(int side, std::mt19937_64& rng) {
  const double w = 1.5 / side;
  Fractal grime(10, 3, rng);
  std::uniform_real_distribution<double> ang(0.1, 0.6);
  const double a = ang(rng);
  return render(side, [&](double u, double v) {
    const double x = std::cos(a) * u + std::sin(a) * v, y = -std::sin(a) * u + std::cos(a) * v;
    const double cell = 0.11;
    const double fx = x / cell - std::floor(x / cell), fy = y / cell - std::floor(y / cell);
    const double d = std::max(std::abs(fx - 0.5), std::abs(fy - 0.5)) * cell - 0.45 * cell;
    const bool dark = (static_cast<long>(std::floor(x / cell)) + static_cast<long>(std::floor(y / cell))) % 2 == 0;
    const double tile = dark ? 80.0 : 170.0;
    return 40.0 + (tile - 40.0) * coverage(d, w) + 40.0 * (grime(u, v) - 0.5);
  });
}

Grid terrain(int side, std::mt19937_64& rng) {
  Fractal f(5, 6, rng);
  return render(side, [&](double u, double v) { return 255.0 * std::clamp(1.6 * (f(u, v) - 0.5) + 0.5, 0.0, 1.0); });
}

Grid cells(int side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, 1.0), shade(60.0, 200.0);
  struct Seed {
    double u, v, s;
  };
  std::vector<Seed> seeds(60);
  for (auto& s : seeds) s = {pos(rng), pos(rng), shade(rng)};
  return render(side, [&](double u, double v) {
    double d1 = 9.0, d2 = 9.0, s1 = 0.0;
    for (const auto& s : seeds) {
      const double d = std::hypot(u - s.u, v - s.v);
      if (d < d1) {
        d2 = d1;
        d1 = d;
        s1 = s.s;
      } else if (d < d2) {
        d2 = d;
      }
    }
    const double wall = coverage(0.006 - (d2 - d1), 1.5 / side);
    return s1 * (1.0 - wall) + 25.0 * wall - 120.0 * d1;
  });
}

Grid waves(int side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dir(0.0, kPi), lam(0.03, 0.15), ph(0.0, 2 * kPi);
  struct Wave {
    double cu, cv, l, p;
  };
  std::vector<Wave> ws(7);
  for (auto& w : ws) {
    const double a = dir(rng);
    w = {std::cos(a), std::sin(a), lam(rng), ph(rng)};
  }
  return render(side, [&](double u, double v) {
    double val = 128.0;
    for (const auto& w : ws) val += 16.0 * std::sin(2.0 * kPi * (w.cu * u + w.cv * v) / w.l + w.p);
    return val;
  });
}

Grid shapes(int side, std::mt19937_64& rng) {
  const double w = 1.5 / side;
  std::uniform_real_distribution<double> pos(0.1, 0.9), size(0.04, 0.14), shade(20.0, 235.0), ang(0.0, kPi);
  std::uniform_int_distribution<int> kind(0, 2), sides(3, 7);
  struct Shape {
    int kind, sides;
    double u, v, s, a, shade;
  };
  std::vector<Shape> ss(18);
  for (auto& s : ss) s = {kind(rng), sides(rng), pos(rng), pos(rng), size(rng), ang(rng), shade(rng)};
  Fractal bg(4, 3, rng);
  return render(side, [&](double u, double v) {
    double val = 90.0 + 80.0 * bg(u, v);
    for (const auto& s : ss) {
      double d = 0.0;
      if (s.kind == 0) d = ellipse_distance(u, v, s.u, s.v, s.s, 0.6 * s.s, s.a);
      if (s.kind == 1) d = box_distance(u, v, s.u, s.v, s.s, 0.5 * s.s, s.a);
      if (s.kind == 2) d = polygon_distance(u, v, s.u, s.v, s.s, s.sides, s.a);
      val += coverage(d, w) * (s.shade - val);
    }
    return val;
  });
}

Grid leaves(int side, std::mt19937_64& rng) {
  const double w = 1.5 / side;
  std::uniform_real_distribution<double> pos(0.0, 1.0), len(0.05, 0.12), ang(0.0, kPi), shade(40.0, 220.0);
  struct Leaf {
    double u, v, l, a, s;
  };
  std::vector<Leaf> ls(70);
  for (auto& l : ls) l = {pos(rng), pos(rng), len(rng), ang(rng), shade(rng)};
  return render(side, [&](double u, double v) {
    double val = 60.0;
    for (const auto& l : ls) {
      const double d = ellipse_distance(u, v, l.u, l.v, l.l, 0.35 * l.l, l.a);
      const double vein = coverage(std::abs(-std::sin(l.a) * (u - l.u) + std::cos(l.a) * (v - l.v)) - 0.002, w);
      val += coverage(d, w) * (l.s - 30.0 * vein - val);
    }
    return val;
  });
}

Grid city(int side, std::mt19937_64& rng) {
  const double w = 1.5 / side;
  std::uniform_real_distribution<double> height(0.2, 0.7), shade(60.0, 180.0);
  std::vector<std::pair<double, double>> towers(10);
  for (auto& t : towers) t = {height(rng), shade(rng)};
  Fractal haze(3, 2, rng);
  return render(side, [&](double u, double v) {
    double val = 215.0 - 60.0 * v + 15.0 * haze(u, v);
    for (std::size_t b = 0; b < towers.size(); ++b) {
      const double cu = (b + 0.5) / towers.size(), hw = 0.4 / towers.size();
      const double top = 1.0 - towers[b].first;
      const double body = coverage(box_distance(u, v, cu, 0.5 * (top + 1.2), hw, 0.5 * (1.2 - top)), w);
      const double wx = (u - cu + hw) / 0.018, wy = (v - top) / 0.03;
      const double fx = wx - std::floor(wx), fy = wy - std::floor(wy);
      const double window =
          coverage(std::max(std::abs(fx - 0.5) * 0.018 - 0.005, std::abs(fy - 0.5) * 0.03 - 0.008), w);
      val += body * (towers[b].second + 60.0 * window - val);
    }
    return val;
  });
}

struct SceneEntry {
  const char* name;
  Grid (*make)(int, std::mt19937_64&);
};

constexpr SceneEntry kScenes[] = {
    {"portrait", portrait}, {"cameraman", cameraman}, {"pentagon", pentagon}, {"blobs", blobs},
    {"rings", rings},       {"tiles", tiles},         {"terrain", terrain},   {"cells", cells},
    {"waves", waves},       {"shapes", shapes},       {"leaves", leaves},     {"city", city},
};

}  // namespace

const std::vector<std::string>& scene_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& s : kScenes) n.emplace_back(s.name);
    return n;
  }();
  return names;
}

Grid make_scene(std::string_view name, int side, std::uint64_t seed) {
  if (side < 2) throw DimensionError("make_scene: side must be at least 2");
  for (const auto& s : kScenes) {
    if (name == s.name) {
      std::uint64_t h = 1469598103934665603ULL;  // FNV-1a of the name, mixed with the seed
      for (char c : name) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
      std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + h);
      return s.make(side, rng);
    }
  }
  throw ContractError("unknown scene '" + std::string(name) + "'");
}

}  // namespace inband::sim
