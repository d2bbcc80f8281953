#include "inband/sim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

#include "inband/error.hpp"
#include "inband/inband_shift.hpp"

namespace inband::sim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
}

}  // namespace

double sample_bicubic(const Grid& g, double y, double x) {
  const int rows = g.rows(), cols = g.cols();
  const int i = static_cast<int>(std::floor(y)), j = static_cast<int>(std::floor(x));
  const double fy = y - i, fx = x - j;
  auto at = [&](int r, int c) { return g(std::clamp(r, 0, rows - 1), std::clamp(c, 0, cols - 1)); };
  double col[4];
  for (int m = 0; m < 4; ++m) {
    const int r = i - 1 + m;
    col[m] = catmull_rom(at(r, j - 1), at(r, j), at(r, j + 1), at(r, j + 2), fx);
  }
  return catmull_rom(col[0], col[1], col[2], col[3], fy);
}

Grid block_mean(const Grid& g, int factor) {
  if (factor < 1 || g.rows() % factor != 0 || g.cols() % factor != 0)
    throw DimensionError("block_mean: factor must divide the grid size");
  Grid out(g.rows() / factor, g.cols() / factor);
  const double norm = 1.0 / (factor * factor);
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) {
      double s = 0.0;
      for (int r = 0; r < factor; ++r)
        for (int c = 0; c < factor; ++c) s += g(i * factor + r, j * factor + c);
      out(i, j) = s * norm;
    }
  return out;
}

Grid resize(const Grid& g, int new_side) {
  if (!g.is_square() || new_side < 1) throw DimensionError("resize: square grid and positive side required");
  const int side = g.rows();
  if (new_side == side) return g;
  if (new_side < side && side % new_side == 0 && is_pow2(side / new_side)) return block_mean(g, side / new_side);
  // Pixel centres are aligned: source coordinate = (dst + 0.5) * side / new_side - 0.5.
  const double f = static_cast<double>(side) / new_side;
  Grid out = Grid::square(new_side);
  for (int i = 0; i < new_side; ++i)
    for (int j = 0; j < new_side; ++j) out(i, j) = sample_bicubic(g, (i + 0.5) * f - 0.5, (j + 0.5) * f - 0.5);
  return out;
}

Grid warp_rigid(const Grid& g, double theta_deg, double tx, double ty) {
  const double c = std::cos(theta_deg * kDeg), s = std::sin(theta_deg * kDeg);
  const double my = 0.5 * (g.rows() - 1), mx = 0.5 * (g.cols() - 1);
  Grid out(g.rows(), g.cols());
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) {
      // p = R^-1 (q - c) + c - t
      const double qx = j - mx, qy = i - my;
      const double px = c * qx + s * qy + mx - tx;
      const double py = -s * qx + c * qy + my - ty;
      out(i, j) = sample_bicubic(g, py, px);
    }
  return out;
}

Grid circular_translate(const Grid& g, double tx, double ty) {
  // Separable two-tap weights: out(x) = (1 - f) g(x0) + f g(x0 + 1), x0 = floor(x - t).
  auto pass = [](const Grid& in, double t, bool along_cols) {
    Grid out(in.rows(), in.cols());
    const int n = along_cols ? in.cols() : in.rows();
    const double fl = std::floor(-t);
    const double f = -t - fl;
    const long long base = static_cast<long long>(fl);
    for (int i = 0; i < in.rows(); ++i)
      for (int j = 0; j < in.cols(); ++j) {
        const int idx = along_cols ? j : i;
        const int i0 = static_cast<int>(pos_mod(idx + base, n)), i1 = static_cast<int>(pos_mod(idx + base + 1, n));
        const double v0 = along_cols ? in(i, i0) : in(i0, j);
        const double v1 = along_cols ? in(i, i1) : in(i1, j);
        out(i, j) = f == 0.0 ? v0 : (1.0 - f) * v0 + f * v1;
      }
    return out;
  };
  return pass(pass(g, tx, true), ty, false);
}

Pair synthesize_pair(const Grid& hi_res, const SimilarityParams& params, SynthesisMode mode, int target_side) {
  if (!hi_res.is_square()) throw DimensionError("synthesize_pair: source must be square");
  if (!is_pow2(target_side) || target_side < 2) throw DimensionError("synthesize_pair: target side must be a power of two");
  if (hi_res.rows() < 2 * target_side)
    throw DimensionError("synthesize_pair: source side " + std::to_string(hi_res.rows()) + " is below twice the target " +
                         std::to_string(target_side));
  if (!(params.sigma > 0.0)) throw ContractError("synthesize_pair: scale must be positive");

  const int crop = 2 * target_side;
  const int off = (hi_res.rows() - crop) / 2;
  auto centre_crop = [&](const Grid& g) {
    Grid out = Grid::square(crop);
    for (int i = 0; i < crop; ++i)
      for (int j = 0; j < crop; ++j) out(i, j) = g(off + i, off + j);
    return out;
  };
  const Grid ref = block_mean(centre_crop(hi_res), 2);

  if (mode == SynthesisMode::exact) {
    if (params.theta_deg != 0.0 || params.sigma != 1.0)
      throw ContractError("wavelet-exact synthesis supports translation only");
    return {ImageGrid(ref), ImageGrid(circular_translate(ref, params.tx, params.ty))};
  }

  // Translation is given in target pixels; the source is sampled twice as finely.
  Grid warped = warp_rigid(hi_res, params.theta_deg, 2.0 * params.tx, 2.0 * params.ty);
  Grid sen = block_mean(centre_crop(warped), 2);
  if (params.sigma != 1.0) {
    const double side = params.sigma * target_side;
    const int new_side = static_cast<int>(std::lround(side));
    if (std::abs(side - new_side) > 1e-9 || !is_pow2(new_side) || new_side < 2)
      throw ContractError("synthesize_pair: sigma * target side must be a power of two");
    sen = resize(sen, new_side);
  }
  return {ImageGrid(ref), ImageGrid(std::move(sen))};
}

ImageGrid add_gaussian_noise(const ImageGrid& img, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return img;
  if (!std::isfinite(snr_db)) throw ContractError("add_gaussian_noise: SNR must be finite or +inf");
  const auto v = img.grid().values();
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double power = 0.0;
  for (double x : v) power += (x - mean) * (x - mean);
  power /= static_cast<double>(v.size());
  if (power == 0.0) throw DegenerateInputError("add_gaussian_noise: constant image has no signal power");
  const double sd = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sd);
  Grid out = img.grid();
  for (double& x : out.values()) x += noise(rng);
  return ImageGrid(std::move(out));
}

double measured_snr_db(const ImageGrid& clean, const ImageGrid& noisy) {
  if (clean.side() != noisy.side()) throw DimensionError("measured_snr_db: size mismatch");
  const auto c = clean.grid().values(), n = noisy.grid().values();
  const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
  double sig = 0.0, err = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    sig += (c[i] - mean) * (c[i] - mean);
    err += (n[i] - c[i]) * (n[i] - c[i]);
  }
  return 10.0 * std::log10(sig / err);
}

ThresholdResult sparsify_pyramid(const HaarPyramid& pyr, double fraction, SparsityMode mode, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ContractError("sparsify_pyramid: fraction must lie in (0, 1]");
  if (mode == SparsityMode::largest) return hard_threshold(pyr, threshold::KeepFraction{fraction});

  pyr.validate();
  const std::size_t total = pyr.detail_count();
  const auto keep = std::min(total, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total))));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::uint8_t> flag(total, 0);
  for (std::size_t i = 0; i < keep; ++i) flag[order[i]] = 1;

  ThresholdResult r{pyr, {}, 0.0};
  r.mask.levels.resize(pyr.levels());
  r.mask.retained = keep;
  std::size_t pos = 0;
  for (int l = 0; l < pyr.levels(); ++l)
    for (int o = 0; o < 3; ++o) {
      auto vals = r.pyramid.details[l].plane(o).values();
      auto& m = r.mask.levels[l][o];
      m.assign(vals.size(), 0);
      for (std::size_t i = 0; i < vals.size(); ++i, ++pos) {
        m[i] = flag[pos];
        if (!flag[pos]) vals[i] = 0.0;
      }
    }
  return r;
}

Metrics image_metrics(const ImageGrid& ref, const ImageGrid& test) {
  if (ref.side() != test.side()) throw DimensionError("image_metrics: images differ in size");
  const auto a = ref.grid().values(), b = test.grid().values();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  Metrics m;
  m.mse = s / static_cast<double>(a.size());
  m.psnr_db = m.mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(255.0 * 255.0 / m.mse);
  return m;
}

ImageGrid predict_sensed(const ImageGrid& ref, const SimilarityParams& estimate, SynthesisMode mode, int sensed_side) {
  if (mode == SynthesisMode::exact) {
    const auto pyr = forward_haar(ref);
    const auto d = compute_difference_field(pyr, pyr.levels());
    const int h_max = 16;
    const DyadicShift sx = quantize_shift(-estimate.tx, h_max, Axis::horizontal);
    const DyadicShift sy = quantize_shift(-estimate.ty, h_max, Axis::vertical);
    if (std::abs(sx.pixels() + estimate.tx) < 1e-12 && std::abs(sy.pixels() + estimate.ty) < 1e-12)
      return inverse_haar(shifted_pyramid(d, pyr.global_approx, sx, sy));
    return ImageGrid(circular_translate(ref.grid(), estimate.tx, estimate.ty));
  }
  Grid g = warp_rigid(ref.grid(), estimate.theta_deg, estimate.tx, estimate.ty);
  if (sensed_side != ref.side()) g = resize(g, sensed_side);
  return ImageGrid(std::move(g));
}

namespace {

// Metrics over the central region, away from borders that warping fills by clamping.
Metrics central_metrics(const ImageGrid& a, const ImageGrid& b, int margin) {
  if (margin == 0) return image_metrics(a, b);
  const int side = a.side() - 2 * margin;
  Grid ca = Grid::square(side), cb = Grid::square(side);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      ca(i, j) = a(i + margin, j + margin);
      cb(i, j) = b(i + margin, j + margin);
    }
  double s = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i) s += (ca.values()[i] - cb.values()[i]) * (ca.values()[i] - cb.values()[i]);
  Metrics m;
  m.mse = s / static_cast<double>(ca.size());
  m.psnr_db = m.mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(255.0 * 255.0 / m.mse);
  return m;
}

}  // namespace

ExperimentRecord run_scenario(const ScenarioSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentRecord rec;
  rec.scenario = spec.id;
  rec.truth = spec.truth;
  try {
    const Grid source = make_scene(spec.scene, spec.source_side, spec.scene_seed);
    const Pair clean = synthesize_pair(source, spec.truth, spec.mode, spec.target_side);
    Pair observed = clean;
    if (spec.snr_db) {
      observed.ref = add_gaussian_noise(clean.ref, *spec.snr_db, spec.seed * 2 + 1);
      observed.sen = add_gaussian_noise(clean.sen, *spec.snr_db, spec.seed * 2 + 2);
    }
    HaarPyramid pr = forward_haar(observed.ref);
    HaarPyramid ps = forward_haar(observed.sen);
    if (spec.sparsity) {
      if (spec.sparsify_reference) pr = sparsify_pyramid(pr, *spec.sparsity, spec.sparsity_mode, spec.seed * 2 + 1).pyramid;
      ps = sparsify_pyramid(ps, *spec.sparsity, spec.sparsity_mode, spec.seed * 2 + 2).pyramid;
    }
    const RegistrationReport rep = register_pyramids(pr, ps, spec.config);
    rec.estimate = rep.params;
    rec.ncc = rep.ncc;
    rec.iterations = rep.translation.iterations;
    rec.outlier = !rep.translation.converged;

    // Registration quality: the clean reference moved by the estimate against the clean sensed image.
    const ImageGrid predicted = predict_sensed(clean.ref, rep.params, spec.mode, clean.sen.side());
    const bool warped = spec.mode == SynthesisMode::bicubic;
    const Metrics m = central_metrics(predicted, clean.sen, warped ? clean.sen.side() / 8 : 0);
    rec.psnr_db = m.psnr_db;
    rec.mse = m.mse;
  } catch (const Error& e) {
    rec.error = e.what();
    rec.outlier = true;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.estimate = {nan, nan, nan, nan};
    rec.psnr_db = rec.mse = rec.ncc = nan;
  }
  rec.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::vector<ExperimentRecord> run_experiment(const std::vector<ScenarioSpec>& specs, int threads) {
  if (specs.empty()) throw ContractError("run_experiment: no scenarios");
  std::vector<ExperimentRecord> out(specs.size());
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int workers = std::min<int>(threads > 0 ? threads : hw, static_cast<int>(specs.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) out[i] = run_scenario(specs[i]);
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

BnBChoice cross_validate_bnb(const ScenarioSpec& base, const std::vector<std::pair<double, double>>& shifts,
                             const std::vector<double>& taus, const std::vector<int>& ks, std::uint64_t seed) {
  if (shifts.empty() || taus.empty() || ks.empty()) throw ContractError("cross_validate_bnb: empty grid");
  std::vector<ScenarioSpec> specs;
  for (int k : ks)
    for (double tau : taus)
      for (std::size_t s = 0; s < shifts.size(); ++s) {
        ScenarioSpec c = base;
        c.id = "calibration";
        c.truth.tx = shifts[s].first;
        c.truth.ty = shifts[s].second;
        c.seed = seed + 7919 * (s + 1);
        c.config.k = k;
        c.config.bnb.tau = tau;
        specs.push_back(c);
      }
  const auto records = run_experiment(specs);

  BnBChoice best{taus.front(), ks.front(), std::numeric_limits<double>::infinity()};
  std::size_t r = 0;
  for (int k : ks)
    for (double tau : taus) {
      double err = 0.0;
      for (std::size_t s = 0; s < shifts.size(); ++s, ++r) {
        const auto& rec = records[r];
        const double e = std::max(std::abs(rec.estimate.tx - rec.truth.tx), std::abs(rec.estimate.ty - rec.truth.ty));
        err += std::isfinite(e) ? e : 10.0;
      }
      err /= static_cast<double>(shifts.size());
      const bool better = err < best.mean_error - 1e-12 ||
                          (std::abs(err - best.mean_error) <= 1e-12 && (tau > best.tau || (tau == best.tau && k < best.k)));
      if (better) best = {tau, k, err};
    }
  return best;
}

}  // namespace inband::sim
