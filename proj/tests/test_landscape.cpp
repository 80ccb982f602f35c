#include <gtest/gtest.h>

#include <random>

#include "patchcomp/landscape.hpp"

using namespace patchcomp;

TEST(Landscape, Geometry) {
  const Landscape l({0.0, 1.0, 2.5, 3.0});
  EXPECT_EQ(l.patches(), 3u);
  EXPECT_EQ(l.interfaces(), 2u);
  EXPECT_DOUBLE_EQ(l.length(1), 1.5);
  EXPECT_DOUBLE_EQ(l.total_length(), 3.0);
}

TEST(Landscape, RejectsBadBoundaries) {
  EXPECT_THROW(Landscape({0.0}), ValidationError);
  EXPECT_THROW(Landscape({0.5, 1.0}), ValidationError);
  EXPECT_THROW(Landscape({0.0, 1.0, 1.0}), ValidationError);
  try {
    Landscape({0.0, 2.0, 1.0});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("landscape.boundaries[2]"), std::string::npos);
  }
}

TEST(Environment, Validation) {
  PatchEnvironment env{{1.0, 1.0}, {1.0, -2.0}};
  EXPECT_THROW(env.validate(2), ValidationError);
  env.k[1] = 2.0;
  EXPECT_NO_THROW(env.validate(2));
  EXPECT_THROW(env.validate(3), ValidationError);
  EXPECT_DOUBLE_EQ(env.max_k(), 2.0);
  EXPECT_DOUBLE_EQ(env.min_k(), 1.0);
}

TEST(Traits, JumpRatiosFromPreferences) {
  // alpha = 1/2 with equal diffusion gives no jump.
  EXPECT_DOUBLE_EQ(derive_jump_ratios({0.5}, {1.0, 1.0})[0], 1.0);
  // alpha/(1-alpha) = 3, d1/d2 = 2.
  EXPECT_DOUBLE_EQ(derive_jump_ratios({0.75}, {2.0, 1.0})[0], 6.0);
  EXPECT_THROW(derive_jump_ratios({1.0}, {1.0, 1.0}), ValidationError);
  EXPECT_THROW(derive_jump_ratios({0.5}, {1.0}), ValidationError);
}

TEST(Traits, PreferenceRoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> a(0.01, 0.99), d(0.1, 5.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> alpha{a(rng), a(rng)}, dd{d(rng), d(rng), d(rng)};
    const auto back = recover_preferences(derive_jump_ratios(alpha, dd), dd);
    for (std::size_t i = 0; i < alpha.size(); ++i) EXPECT_NEAR(back[i], alpha[i], 1e-14);
  }
}

TEST(Traits, CumulativeJumps) {
  const SpeciesTraits t({1.0, 1.0, 1.0}, StrategyVector{{2.0, 3.0}});
  const auto c = t.cumulative_jumps();
  EXPECT_DOUBLE_EQ(c[0], 1.0);
  EXPECT_DOUBLE_EQ(c[1], 2.0);
  EXPECT_DOUBLE_EQ(c[2], 6.0);
  EXPECT_THROW(SpeciesTraits({1.0, 1.0}, StrategyVector{{2.0, 3.0}}), ValidationError);
  EXPECT_THROW(SpeciesTraits({1.0, 0.0}, StrategyVector{{2.0}}), ValidationError);
}

TEST(Ifd, StrategyIsCapacityRatio) {
  const PatchEnvironment env{{1, 1, 1}, {1, 2, 4}};
  EXPECT_EQ(ifd_strategy(env), (StrategyVector{{2.0, 2.0}}));
  EXPECT_THROW(ifd_strategy(PatchEnvironment{{1}, {1}}), ValidationError);
}

TEST(Orderings, StrictAndWeak) {
  const StrategyVector a{{3, 3}}, b{{2, 2}}, c{{3, 2}};
  EXPECT_TRUE(strict_dominates(a, b));
  EXPECT_FALSE(strict_dominates(a, c));
  EXPECT_TRUE(weakly_dominates({1, 2}, {1, 1}));
  EXPECT_FALSE(weakly_dominates({1, 0.5}, {1, 1}));
  EXPECT_TRUE(opposite_sides(a, StrategyVector{{1, 1}}, b));
  EXPECT_FALSE(opposite_sides(a, c, b));
}

TEST(Regions, TwoPatchLabels) {
  const StrategyVector kbar{{2.0}};
  auto label = [&](double p, double ph, std::vector<double> d, std::vector<double> dh) {
    return classify_region(StrategyVector{{p}}, StrategyVector{{ph}}, d, dh, kbar);
  };
  EXPECT_EQ(label(3, 5, {1, 1}, {2, 2}), RegionLabel::L2);
  EXPECT_EQ(label(5, 3, {1, 1}, {0.5, 0.5}), RegionLabel::L1star);
  EXPECT_EQ(label(5, 1.5, {1, 1}, {0.5, 0.5}), RegionLabel::L3);
  EXPECT_EQ(label(5, 1.5, {1, 1}, {2, 2}), RegionLabel::L3);
  EXPECT_EQ(label(0.3, 1.2, {1, 1}, {0.5, 0.5}), RegionLabel::S1star);
  EXPECT_EQ(label(1.2, 0.3, {1, 1}, {2, 2}), RegionLabel::S2);
  EXPECT_EQ(label(1, 4, {1, 1}, {1, 1}), RegionLabel::S3);
  EXPECT_EQ(label(2, 4, {1, 1}, {1, 1}), RegionLabel::IFDResident);
  // p >> p_hat but d_hat > d somewhere: no row applies.
  EXPECT_EQ(label(5, 3, {1, 1}, {2, 0.5}), RegionLabel::Unclassified);
  EXPECT_TRUE(is_l_region(RegionLabel::L3));
  EXPECT_TRUE(is_s_region(RegionLabel::S1));
  EXPECT_FALSE(is_s_region(RegionLabel::L1));
}

TEST(Regions, OverlappingConditionsPreferStarredSets) {
  // p >> p_hat >> kbar with d >= d_hat is both L1 and L1star.
  const auto r = classify_region(StrategyVector{{4.0}}, StrategyVector{{3.0}}, {1, 1}, {1, 1}, StrategyVector{{2.0}});
  EXPECT_EQ(r, RegionLabel::L1star);
}

TEST(Regions, DimensionMismatchRejected) {
  EXPECT_THROW(classify_region(StrategyVector{{1.0}}, StrategyVector{{1.0, 2.0}}, {1, 1}, {1, 1}, StrategyVector{{2.0}}),
               ValidationError);
}
