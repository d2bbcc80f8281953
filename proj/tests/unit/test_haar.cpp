#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "inband/error.hpp"
#include "inband/haar.hpp"
#include "oracles.hpp"

using inband::Grid;
using inband::ImageGrid;

namespace {

ImageGrid tiny() { return ImageGrid(Grid(2, 2, std::vector<double>{1, 3, 5, 7})); }

}  // namespace

TEST(ForwardHaar, TwoByTwoCoefficients) {
  const auto pyr = inband::forward_haar(tiny());
  ASSERT_EQ(pyr.levels(), 1);
  EXPECT_DOUBLE_EQ(pyr.global_approx, 4.0);
  EXPECT_DOUBLE_EQ(pyr.details[0].horizontal(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(pyr.details[0].vertical(0, 0), -2.0);
  EXPECT_DOUBLE_EQ(pyr.details[0].diagonal(0, 0), 0.0);
}

TEST(ForwardHaar, ConstantImageHasNoDetail) {
  for (int side : {2, 8, 32}) {
    const auto pyr = inband::forward_haar(ImageGrid(Grid::square(side, 9.0)));
    EXPECT_DOUBLE_EQ(pyr.global_approx, 9.0);
    for (const auto& lvl : pyr.details)
      for (int o = 0; o < 3; ++o)
        for (double v : lvl.plane(o).values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(ForwardHaar, DetailsMatchBlockMeanOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Grid img = oracle::random_square(8, seed);
    const auto pyr = inband::forward_haar(ImageGrid(img));
    EXPECT_NEAR(pyr.global_approx, oracle::block_means(img, 0)(0, 0), 1e-12);
    for (int l = 0; l < 3; ++l) {
      const auto expected = oracle::details_from_means(img, l);
      for (int o = 0; o < 3; ++o) EXPECT_LT(inband::max_abs_diff(pyr.details[l].plane(o), expected[o]), 1e-9);
      EXPECT_LT(inband::max_abs_diff(inband::approximation_at(pyr, l), oracle::block_means(img, l)), 1e-9);
    }
  }
}

TEST(ForwardHaar, RejectsNonPowerOfTwo) {
  EXPECT_THROW(ImageGrid(Grid::square(6)), inband::DimensionError);
  EXPECT_THROW(ImageGrid(Grid(4, 8)), inband::DimensionError);
  EXPECT_THROW(ImageGrid(Grid::square(1)), inband::DimensionError);
  Grid bad = Grid::square(4);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(ImageGrid(std::move(bad)), inband::DimensionError);
}

TEST(InverseHaar, RoundTrip) {
  EXPECT_EQ(inband::inverse_haar(inband::forward_haar(tiny())), tiny());
  for (std::uint64_t seed = 10; seed < 14; ++seed) {
    const Grid img = oracle::random_square(16, seed);
    const auto back = inband::inverse_haar(inband::forward_haar(ImageGrid(img)));
    EXPECT_LT(inband::max_abs_diff(back.grid(), img), 1e-9);
  }
}

TEST(InverseHaar, ZeroDetailsGiveConstant) {
  inband::HaarPyramid pyr = inband::forward_haar(ImageGrid(Grid::square(8, 0.0)));
  pyr.global_approx = 12.5;
  const auto img = inband::inverse_haar(pyr);
  for (double v : img.grid().values()) EXPECT_EQ(v, 12.5);
}

TEST(InverseHaar, RejectsMalformedPyramid) {
  inband::HaarPyramid pyr = inband::forward_haar(ImageGrid(Grid::square(8, 1.0)));
  pyr.details[1].vertical = Grid::square(3);
  EXPECT_THROW(inband::inverse_haar(pyr), inband::DimensionError);
}

TEST(DifferenceField, BaseCaseAndTwoByTwo) {
  const auto pyr = inband::forward_haar(tiny());
  const auto d0 = inband::compute_difference_field(pyr, 0);
  EXPECT_EQ(d0.values.rows(), 1);
  EXPECT_EQ(d0.values(0, 0), 0.0);
  const auto d1 = inband::compute_difference_field(pyr, 1);
  EXPECT_EQ(d1.values, Grid(2, 2, std::vector<double>{-3, -1, 1, 3}));
}

TEST(DifferenceField, EqualsBlockMeansMinusGlobalMean) {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const Grid img = oracle::random_square(16, seed);
    const auto pyr = inband::forward_haar(ImageGrid(img));
    const double mean = oracle::block_means(img, 0)(0, 0);
    for (int l = 0; l <= 4; ++l) {
      Grid expected = oracle::block_means(img, l);
      for (double& v : expected.values()) v -= mean;
      EXPECT_LT(inband::max_abs_diff(inband::compute_difference_field(pyr, l).values, expected), 1e-9) << "level " << l;
    }
  }
}

TEST(DifferenceField, RangeChecked) {
  const auto pyr = inband::forward_haar(ImageGrid(Grid::square(8, 2.0)));
  EXPECT_THROW(inband::compute_difference_field(pyr, 4), inband::RangeError);
  EXPECT_THROW(inband::compute_difference_field(pyr, -1), inband::RangeError);
}

TEST(HaarProperties, Linearity) {
  const Grid x = oracle::random_square(16, 31);
  const Grid y = oracle::random_square(16, 32);
  Grid mix = Grid::square(16);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.values()[i] = 0.75 * x.values()[i] - 2.0 * y.values()[i];
  const auto lhs = inband::forward_haar(ImageGrid(mix));
  const auto rhs = inband::combine(0.75, inband::forward_haar(ImageGrid(x)), -2.0, inband::forward_haar(ImageGrid(y)));
  EXPECT_NEAR(lhs.global_approx, rhs.global_approx, 1e-9);
  for (int l = 0; l < lhs.levels(); ++l)
    for (int o = 0; o < 3; ++o) EXPECT_LT(inband::max_abs_diff(lhs.details[l].plane(o), rhs.details[l].plane(o)), 1e-9);
}

TEST(HardThreshold, KeepFractionExtremes) {
  const auto pyr = inband::forward_haar(ImageGrid(oracle::random_square(16, 40)));
  const auto all = inband::hard_threshold(pyr, inband::threshold::KeepFraction{1.0});
  EXPECT_EQ(all.mask.retained, pyr.detail_count());
  EXPECT_EQ(all.mask.count_true(), all.mask.retained);
  for (int l = 0; l < pyr.levels(); ++l)
    for (int o = 0; o < 3; ++o) EXPECT_EQ(all.pyramid.details[l].plane(o), pyr.details[l].plane(o));

  const auto none = inband::hard_threshold(pyr, inband::threshold::KeepFraction{0.0});
  EXPECT_EQ(none.mask.retained, 0u);
  EXPECT_EQ(none.mask.count_true(), 0u);
  EXPECT_EQ(none.pyramid.global_approx, pyr.global_approx);
  for (const auto& lvl : none.pyramid.details)
    for (int o = 0; o < 3; ++o)
      for (double v : lvl.plane(o).values()) EXPECT_EQ(v, 0.0);
}

TEST(HardThreshold, KeepFractionCountAndNesting) {
  const auto pyr = inband::forward_haar(ImageGrid(oracle::random_square(32, 41)));
  const std::vector<double> fractions{0.02, 0.07, 0.1, 0.5};
  std::vector<inband::SparseMask> masks;
  for (double p : fractions) {
    const auto r = inband::hard_threshold(pyr, inband::threshold::KeepFraction{p});
    EXPECT_EQ(r.mask.retained, static_cast<std::size_t>(std::ceil(p * pyr.detail_count())));
    EXPECT_EQ(r.mask.count_true(), r.mask.retained);
    masks.push_back(r.mask);
  }
  for (std::size_t m = 0; m + 1 < masks.size(); ++m)
    for (int l = 0; l < pyr.levels(); ++l)
      for (int o = 0; o < 3; ++o)
        for (std::size_t i = 0; i < masks[m].levels[l][o].size(); ++i)
          if (masks[m].levels[l][o][i]) EXPECT_TRUE(masks[m + 1].levels[l][o][i]);
}

TEST(HardThreshold, UniversalMatchesIndependentFormula) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  Grid img = Grid::square(64);
  for (double& v : img.values()) v = noise(rng);
  const auto pyr = inband::forward_haar(ImageGrid(img));

  std::vector<double> mags;
  for (double v : pyr.details.back().diagonal.values()) mags.push_back(std::abs(v));
  std::sort(mags.begin(), mags.end());
  const double median = 0.5 * (mags[mags.size() / 2 - 1] + mags[mags.size() / 2]);
  const double lambda = median / 0.6745 * std::sqrt(2.0 * std::log(64.0 * 64.0 - 1.0));

  const auto r = inband::hard_threshold(pyr, inband::threshold::Universal{});
  EXPECT_NEAR(r.lambda, lambda, 1e-12);
  std::size_t survivors = 0;
  for (int l = 0; l < pyr.levels(); ++l)
    for (int o = 0; o < 3; ++o) {
      const auto src = pyr.details[l].plane(o).values();
      const auto dst = r.pyramid.details[l].plane(o).values();
      for (std::size_t i = 0; i < src.size(); ++i) {
        const bool keep = std::abs(src[i]) >= lambda;
        survivors += keep;
        EXPECT_EQ(dst[i], keep ? src[i] : 0.0);
      }
    }
  EXPECT_EQ(r.mask.retained, survivors);
}

TEST(HardThreshold, FixedIsIdempotent) {
  const auto pyr = inband::forward_haar(ImageGrid(oracle::random_square(16, 42)));
  const inband::threshold::Fixed mode{3.0};
  const auto once = inband::hard_threshold(pyr, mode);
  const auto twice = inband::hard_threshold(once.pyramid, mode);
  for (int l = 0; l < pyr.levels(); ++l)
    for (int o = 0; o < 3; ++o) EXPECT_EQ(once.pyramid.details[l].plane(o), twice.pyramid.details[l].plane(o));
}

TEST(HardThreshold, RejectsBadFraction) {
  const auto pyr = inband::forward_haar(ImageGrid(Grid::square(4, 1.0)));
  EXPECT_THROW(inband::hard_threshold(pyr, inband::threshold::KeepFraction{1.5}), inband::ContractError);
}

TEST(Subregion, CentredCrops) {
  const auto a = inband::extract_pow2_subregion(Grid(300, 400));
  EXPECT_EQ(a.image.side(), 256);
  EXPECT_EQ(a.top, 22);
  EXPECT_EQ(a.left, 72);

  const Grid sq = oracle::random_square(256, 5);
  const auto b = inband::extract_pow2_subregion(sq);
  EXPECT_EQ(b.image.grid(), sq);

  const auto c = inband::extract_pow2_subregion(Grid(257, 512));
  EXPECT_EQ(c.image.side(), 256);
  EXPECT_EQ(c.top, 0);
  EXPECT_EQ(c.left, 128);

  EXPECT_THROW(inband::extract_pow2_subregion(Grid(1, 40)), inband::DimensionError);
}
