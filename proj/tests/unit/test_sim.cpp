#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "inband/error.hpp"
#include "inband/haar.hpp"
#include "inband/sim/harness.hpp"
#include "oracles.hpp"

using inband::Grid;
using inband::ImageGrid;
namespace sim = inband::sim;

namespace {

ImageGrid scene(const char* name, int side) { return ImageGrid(sim::make_scene(name, side, 1)); }

double mean_removed_power(const Grid& g) {
  double mean = 0.0;
  for (double v : g.values()) mean += v;
  mean /= static_cast<double>(g.size());
  double p = 0.0;
  for (double v : g.values()) p += (v - mean) * (v - mean);
  return p / static_cast<double>(g.size());
}

bool same_record(const sim::ExperimentRecord& a, const sim::ExperimentRecord& b) {
  auto eq = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.scenario == b.scenario && eq(a.estimate.sigma, b.estimate.sigma) &&
         eq(a.estimate.theta_deg, b.estimate.theta_deg) && eq(a.estimate.tx, b.estimate.tx) &&
         eq(a.estimate.ty, b.estimate.ty) && eq(a.psnr_db, b.psnr_db) && eq(a.mse, b.mse) && eq(a.ncc, b.ncc) &&
         a.iterations == b.iterations && a.outlier == b.outlier && a.error == b.error;
}

}  // namespace

// ------------------------------------------------------------------- scenes

TEST(Scenes, DeterministicAndInRange) {
  for (const auto& name : sim::scene_names()) {
    const Grid a = sim::make_scene(name, 64, 3), b = sim::make_scene(name, 64, 3);
    EXPECT_EQ(a, b) << name;
    for (double v : a.values()) {
      EXPECT_GE(v, 0.0) << name;
      EXPECT_LE(v, 255.0) << name;
    }
    EXPECT_GT(mean_removed_power(a), 1.0) << name;
  }
  EXPECT_GE(sim::scene_names().size(), 10u);
  EXPECT_THROW(sim::make_scene("no-such-scene", 64), inband::ContractError);
}

// ---------------------------------------------------------------- resampling

TEST(Resample, BlockMeanMatchesOracle) {
  const Grid g = oracle::random_square(32, 4);
  const Grid m = sim::block_mean(g, 4);
  const Grid o = oracle::block_means(g, 3);
  ASSERT_EQ(m.rows(), 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) EXPECT_NEAR(m(i, j), o(i, j), 1e-12);
}

TEST(Resample, IntegerCircularTranslateIsARoll) {
  const Grid g = oracle::random_square(16, 5);
  const Grid t = sim::circular_translate(g, 3.0, -2.0);
  const Grid o = oracle::circular_shift(g, -3, 2);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(t.values()[i], o.values()[i], 1e-12);
}

TEST(Resample, DyadicTranslateEqualsUpsampledShift) {
  const Grid g = oracle::random_square(8, 6);
  for (int h = 1; h <= 3; ++h)
    for (auto [sx, sy] : {std::pair{1, 0}, {-3, 5}, {7, -2}}) {
      const double s = std::ldexp(1.0, h);
      const Grid t = sim::circular_translate(g, sx / s, sy / s);
      const Grid o = sim::block_mean(oracle::virtual_shift(g, -sx, -sy, h), 1 << h);
      for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_NEAR(t.values()[i], o.values()[i], 1e-9) << "h " << h << " s " << sx << "," << sy;
    }
}

TEST(Resample, ZeroWarpIsIdentity) {
  const Grid g = oracle::random_square(16, 7);
  const Grid w = sim::warp_rigid(g, 0.0, 0.0, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(w.values()[i], g.values()[i], 1e-12);
}

TEST(Resample, ResizeByPowerOfTwoUsesBlockMeans) {
  const Grid g = oracle::random_square(32, 8);
  EXPECT_EQ(sim::resize(g, 8), sim::block_mean(g, 4));
  EXPECT_EQ(sim::resize(g, 64).rows(), 64);
}

// ----------------------------------------------------------------- synthesis

TEST(Synthesis, SizesFollowTheTarget) {
  const Grid src = sim::make_scene("portrait", 512);
  const auto p = sim::synthesize_pair(src, {1.0, 0.0, 0.5, 0.5}, sim::SynthesisMode::bicubic, 256);
  EXPECT_EQ(p.ref.side(), 256);
  EXPECT_EQ(p.sen.side(), 256);
  const auto q = sim::synthesize_pair(src, {0.5, 10.0, 0.0, 0.0}, sim::SynthesisMode::bicubic, 256);
  EXPECT_EQ(q.sen.side(), 128);
}

TEST(Synthesis, IdentityParamsGiveEqualImages) {
  const Grid src = sim::make_scene("leaves", 256);
  for (auto mode : {sim::SynthesisMode::bicubic, sim::SynthesisMode::exact}) {
    const auto p = sim::synthesize_pair(src, {}, mode, 128);
    EXPECT_EQ(p.ref, p.sen);
  }
}

TEST(Synthesis, InsufficientResolutionRejected) {
  const Grid src = sim::make_scene("leaves", 128);
  EXPECT_THROW(sim::synthesize_pair(src, {}, sim::SynthesisMode::bicubic, 128), inband::DimensionError);
  EXPECT_THROW(sim::synthesize_pair(src, {1.0, 5.0, 0.0, 0.0}, sim::SynthesisMode::exact, 64), inband::ContractError);
}

TEST(Synthesis, ExactModeShiftIsRecoveredExactly) {
  sim::ScenarioSpec s;
  s.id = "exact";
  s.scene = "cameraman";
  s.source_side = 256;
  s.target_side = 128;
  s.truth = {1.0, 0.0, 0.25, -0.125};
  const auto r = sim::run_scenario(s);
  ASSERT_TRUE(r.error.empty()) << r.error;
  EXPECT_EQ(r.estimate.tx, 0.25);
  EXPECT_EQ(r.estimate.ty, -0.125);
  // Round-off of the inverse transform only.
  EXPECT_GT(r.psnr_db, 200.0);
  EXPECT_LT(r.mse, 1e-12);
}

// --------------------------------------------------------------------- noise

TEST(Noise, InfiniteSnrIsIdentity) {
  const ImageGrid img = scene("portrait", 64);
  EXPECT_EQ(sim::add_gaussian_noise(img, std::numeric_limits<double>::infinity(), 1), img);
}

TEST(Noise, RealizedSnrWithinTenthOfADecibel) {
  const ImageGrid img = scene("pentagon", 256);
  const double power = mean_removed_power(img.grid());
  for (double snr : {10.0, 20.0, 30.0, 40.0}) {
    const ImageGrid noisy = sim::add_gaussian_noise(img, snr, 17);
    double err = 0.0;
    for (std::size_t i = 0; i < img.grid().size(); ++i) {
      const double n = noisy.grid().values()[i] - img.grid().values()[i];
      err += n * n;
    }
    err /= static_cast<double>(img.grid().size());
    const double realized = 10.0 * std::log10(power / err);
    EXPECT_NEAR(realized, snr, 0.1);
    EXPECT_NEAR(sim::measured_snr_db(img, noisy), realized, 1e-9);
  }
}

TEST(Noise, DeterministicPerSeed) {
  const ImageGrid img = scene("terrain", 64);
  EXPECT_EQ(sim::add_gaussian_noise(img, 20.0, 5), sim::add_gaussian_noise(img, 20.0, 5));
  EXPECT_NE(sim::add_gaussian_noise(img, 20.0, 5), sim::add_gaussian_noise(img, 20.0, 6));
}

TEST(Noise, Rejections) {
  const ImageGrid flat(Grid(16, 16, 3.0));
  EXPECT_THROW(sim::add_gaussian_noise(flat, 20.0, 1), inband::DegenerateInputError);
  EXPECT_THROW(sim::add_gaussian_noise(scene("portrait", 16), std::nan(""), 1), inband::ContractError);
}

// ---------------------------------------------------------------- sparsity

TEST(Sparsity, FullFractionIsIdentity) {
  const auto pyr = inband::forward_haar(scene("city", 64));
  const auto r = sim::sparsify_pyramid(pyr, 1.0);
  EXPECT_EQ(r.mask.retained, pyr.detail_count());
  for (int l = 0; l < pyr.levels(); ++l)
    for (int o = 0; o < 3; ++o) EXPECT_EQ(r.pyramid.details[l].plane(o), pyr.details[l].plane(o));
}

TEST(Sparsity, RetainsCeilingOfTheFraction) {
  const auto pyr = inband::forward_haar(scene("city", 256));
  ASSERT_EQ(pyr.detail_count(), 65535u);
  EXPECT_EQ(sim::sparsify_pyramid(pyr, 0.07).mask.retained, 4588u);
  EXPECT_EQ(sim::sparsify_pyramid(pyr, 0.07, sim::SparsityMode::random, 3).mask.retained, 4588u);
}

TEST(Sparsity, LargestModeIsMonotone) {
  const auto pyr = inband::forward_haar(scene("leaves", 64));
  const double fractions[] = {0.02, 0.05, 0.07, 0.2, 0.5, 1.0};
  for (std::size_t f = 0; f + 1 < std::size(fractions); ++f) {
    const auto lo = sim::sparsify_pyramid(pyr, fractions[f]);
    const auto hi = sim::sparsify_pyramid(pyr, fractions[f + 1]);
    for (int l = 0; l < pyr.levels(); ++l)
      for (int o = 0; o < 3; ++o)
        for (std::size_t i = 0; i < lo.mask.levels[l][o].size(); ++i)
          if (lo.mask.levels[l][o][i]) EXPECT_TRUE(hi.mask.levels[l][o][i]);
  }
}

TEST(Sparsity, RandomModeIsSeeded) {
  const auto pyr = inband::forward_haar(scene("leaves", 64));
  const auto a = sim::sparsify_pyramid(pyr, 0.1, sim::SparsityMode::random, 9);
  const auto b = sim::sparsify_pyramid(pyr, 0.1, sim::SparsityMode::random, 9);
  EXPECT_EQ(a.mask.levels, b.mask.levels);
  EXPECT_THROW(sim::sparsify_pyramid(pyr, 0.0), inband::ContractError);
  EXPECT_THROW(sim::sparsify_pyramid(pyr, 1.5), inband::ContractError);
}

// ------------------------------------------------------------------ metrics

TEST(Metrics, IdenticalImages) {
  const ImageGrid img = scene("portrait", 32);
  const auto m = sim::image_metrics(img, img);
  EXPECT_EQ(m.mse, 0.0);
  EXPECT_TRUE(std::isinf(m.psnr_db) && m.psnr_db > 0);
}

TEST(Metrics, ConstantOffsetOfTwo) {
  const Grid g = oracle::random_square(16, 11);
  Grid h = g;
  for (double& v : h.values()) v += 2.0;
  const auto m = sim::image_metrics(ImageGrid(g), ImageGrid(h));
  EXPECT_NEAR(m.mse, 4.0, 1e-9);
  EXPECT_NEAR(m.psnr_db, 42.1102, 1e-4);
}

TEST(Metrics, MatchesTwoPassOracle) {
  const Grid a = oracle::random_square(32, 12), b = oracle::random_square(32, 13);
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i) diff.push_back(a.values()[i] - b.values()[i]);
  double sq = 0.0;
  for (double d : diff) sq += d * d;
  const double mse = sq / static_cast<double>(diff.size());
  const auto m = sim::image_metrics(ImageGrid(a), ImageGrid(b));
  EXPECT_NEAR(m.mse, mse, 1e-9 * mse);
  EXPECT_NEAR(m.psnr_db, 10.0 * std::log10(65025.0 / mse), 1e-9);
}

TEST(Metrics, PsnrFallsAsMseGrows) {
  const Grid g = oracle::random_square(16, 14);
  double last = std::numeric_limits<double>::infinity();
  for (double off : {0.5, 1.0, 3.0, 10.0}) {
    Grid h = g;
    for (double& v : h.values()) v += off;
    const double p = sim::image_metrics(ImageGrid(g), ImageGrid(h)).psnr_db;
    EXPECT_LT(p, last);
    last = p;
  }
  EXPECT_THROW(sim::image_metrics(ImageGrid(g), scene("portrait", 32)), inband::DimensionError);
}

// -------------------------------------------------------------- experiments

TEST(Experiment, IdentityScenario) {
  sim::ScenarioSpec s;
  s.id = "identity";
  s.source_side = 128;
  s.target_side = 64;
  const auto recs = sim::run_experiment({s});
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_TRUE(recs[0].error.empty()) << recs[0].error;
  EXPECT_EQ(recs[0].estimate.sigma, 1.0);
  EXPECT_EQ(recs[0].estimate.theta_deg, 0.0);
  EXPECT_EQ(recs[0].estimate.tx, 0.0);
  EXPECT_EQ(recs[0].estimate.ty, 0.0);
  EXPECT_FALSE(recs[0].outlier);
  EXPECT_GT(recs[0].psnr_db, 200.0);
}

TEST(Experiment, ErrorsAreRecordedAndTheRunContinues) {
  sim::ScenarioSpec bad;
  bad.id = "bad";
  bad.scene = "no-such-scene";
  sim::ScenarioSpec good;
  good.id = "good";
  good.source_side = 128;
  good.target_side = 64;
  good.truth = {1.0, 0.0, 0.5, 0.5};
  const auto recs = sim::run_experiment({bad, good}, 2);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].scenario, "bad");
  EXPECT_FALSE(recs[0].error.empty());
  EXPECT_TRUE(recs[0].outlier);
  EXPECT_TRUE(recs[1].error.empty());
  EXPECT_EQ(recs[1].estimate.tx, 0.5);
  EXPECT_THROW(sim::run_experiment({}), inband::ContractError);
}

TEST(Experiment, DeterministicAcrossRunsAndThreads) {
  std::vector<sim::ScenarioSpec> specs;
  for (double t : {0.25, -0.375, 0.33}) {
    sim::ScenarioSpec s;
    s.id = "t" + std::to_string(t);
    s.scene = "terrain";
    s.source_side = 128;
    s.target_side = 64;
    s.mode = sim::SynthesisMode::bicubic;
    s.truth = {1.0, 0.0, t, -t};
    s.snr_db = 25.0;
    s.seed = 4;
    specs.push_back(s);
  }
  const auto a = sim::run_experiment(specs, 1);
  const auto b = sim::run_experiment(specs, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(same_record(a[i], b[i])) << i;
}

TEST(Experiment, DyadicRowsExactNonDyadicWithinLattice) {
  std::vector<sim::ScenarioSpec> specs;
  const std::pair<double, double> shifts[] = {{0.5, 0.5}, {0.25, -0.125}, {0.33, -0.33}, {-0.7, 0.1}};
  for (auto [tx, ty] : shifts) {
    sim::ScenarioSpec s;
    s.id = "row";
    s.scene = "portrait";
    s.source_side = 256;
    s.target_side = 128;
    s.truth = {1.0, 0.0, tx, ty};
    specs.push_back(s);
  }
  const auto recs = sim::run_experiment(specs);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    ASSERT_TRUE(recs[i].error.empty()) << recs[i].error;
    const double ex = std::abs(recs[i].estimate.tx - recs[i].truth.tx);
    const double ey = std::abs(recs[i].estimate.ty - recs[i].truth.ty);
    if (i < 2) {
      EXPECT_EQ(ex, 0.0);
      EXPECT_EQ(ey, 0.0);
    } else {
      EXPECT_LE(ex, 1.0 / 64.0);
      EXPECT_LE(ey, 1.0 / 64.0);
    }
  }
}

TEST(Experiment, CrossValidationPicksFromTheGrid) {
  sim::ScenarioSpec base;
  base.scene = "pentagon";
  base.source_side = 128;
  base.target_side = 64;
  base.mode = sim::SynthesisMode::bicubic;
  base.snr_db = 20.0;
  base.config.estimate_rotation = false;
  base.config.estimate_scale = false;
  const auto a = sim::cross_validate_bnb(base, {{0.5, -0.25}}, {1.9, 1.5}, {1, 2}, 3);
  const auto b = sim::cross_validate_bnb(base, {{0.5, -0.25}}, {1.9, 1.5}, {1, 2}, 3);
  EXPECT_TRUE(a.tau == 1.9 || a.tau == 1.5);
  EXPECT_TRUE(a.k == 1 || a.k == 2);
  EXPECT_GE(a.mean_error, 0.0);
  EXPECT_EQ(a.tau, b.tau);
  EXPECT_EQ(a.k, b.k);
  EXPECT_THROW(sim::cross_validate_bnb(base, {}, {1.9}, {1}, 3), inband::ContractError);
}
