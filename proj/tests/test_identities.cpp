#include <gtest/gtest.h>

#include "patchcomp/identities.hpp"

using namespace patchcomp;

namespace {

const Landscape kLand({0.0, 1.0, 2.0});
const PatchEnvironment kEnv{{1, 1}, {1, 2}};

// p >> kbar >> p_hat on three patches. On two patches the coexistence state
// is piecewise constant and both identities hold trivially.
const Landscape kThree({0.0, 1.0, 2.0, 3.0});
const PatchEnvironment kThreeEnv{{1, 1, 1}, {1, 2, 4}};
const SpeciesTraits kRes({1.0, 1.0, 1.0}, StrategyVector{{4.0, 3.0}});
const SpeciesTraits kMut({0.5, 1.0, 2.0}, StrategyVector{{1.0, 0.5}});

SystemState coexistence_state(const GridPtr& g) {
  const CompetitionSystem sys(g, kThreeEnv, kRes, kMut);
  SimConfig cfg;
  cfg.steady_tol = 1e-11;
  const auto rec = simulate_default(sys, cfg);
  EXPECT_EQ(rec.verdict, Verdict::Coexistence);
  return rec.final_state;
}

}  // namespace

TEST(InvasionIdentity, SecondOrderConvergence) {
  const SpeciesTraits res({1.0, 1.5}, StrategyVector{{3.0}});
  const SpeciesTraits mut({0.7, 1.2}, StrategyVector{{2.4}});
  double prev = 0.0;
  for (std::size_t n : {100u, 200u, 400u}) {
    const auto g = build_grid(kLand, GridResolution::uniform_count(2, n));
    const auto f = invasion_fitness_detailed(kLand, kEnv, res, mut, g);
    const auto r = invasion_identity_residual(f.ustar, f.eig, kEnv, res, mut, *g);
    EXPECT_GT(std::abs(r.lhs), 1e-3);
    if (prev > 0.0) {
      EXPECT_NEAR(prev / r.relative, 4.0, 0.8);
    }
    prev = r.relative;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(InvasionIdentity, RejectsForeignGrid) {
  const SpeciesTraits t({1.0, 1.0}, StrategyVector{{3.0}});
  const auto g1 = build_grid(kLand, GridResolution::uniform_count(2, 10));
  const auto g2 = build_grid(kLand, GridResolution::uniform_count(2, 12));
  const auto f = invasion_fitness_detailed(kLand, kEnv, t, t, g1);
  EXPECT_THROW(invasion_identity_residual(f.ustar, f.eig, kEnv, t, t, *g2), ValidationError);
}

TEST(Positions, SnapAndLocate) {
  const auto g = build_grid(kLand, GridResolution::uniform_count(2, 10));
  EXPECT_EQ(snap_to_node(*g, 0, 0.33), 3u);
  EXPECT_EQ(snap_to_node(*g, 1, 2.0), 10u);
  EXPECT_EQ(locate_patch(kLand, 1.0, false), 1u);
  EXPECT_EQ(locate_patch(kLand, 1.0, true), 0u);
  EXPECT_EQ(locate_patch(kLand, 0.0, false), 0u);
  EXPECT_THROW(locate_patch(kLand, 2.5, true), ValidationError);
}

TEST(CoexistenceIdentity, SamePatchSmallAndSpanningSecondOrder) {
  double prev_span = 0.0;
  for (std::size_t n : {50u, 100u}) {
    const auto g = build_grid(kThree, GridResolution::uniform_count(3, n));
    const auto s = coexistence_state(g);
    const auto same = coexistence_identity_residual(s.u, s.v, kThreeEnv, kRes, kMut, g, 1.2, 1.8);
    ASSERT_TRUE(same.u_form && same.v_form);
    EXPECT_FALSE(same.spanning);
    EXPECT_LT(std::max(*same.u_form, *same.v_form), 1e-9);
    const auto span = coexistence_identity_residual(s.u, s.v, kThreeEnv, kRes, kMut, g, 0.3, 2.7);
    ASSERT_TRUE(span.spanning);
    EXPECT_GT(*span.spanning, 1e-7);  // discretization error, not rounding
    if (prev_span > 0.0) {
      EXPECT_NEAR(prev_span / *span.spanning, 4.0, 0.8);
    }
    prev_span = *span.spanning;
  }
}

TEST(CoexistenceIdentity, TwoPatchStateIsPiecewiseConstant) {
  const auto g = build_grid(kLand, GridResolution::uniform_count(2, 40));
  const CompetitionSystem sys(g, kEnv, SpeciesTraits({1, 1}, StrategyVector{{4.0}}),
                              SpeciesTraits({1, 1}, StrategyVector{{1.0}}));
  const auto rec = simulate_default(sys, SimConfig{});
  ASSERT_EQ(rec.verdict, Verdict::Coexistence);
  // u1 + v1 = 1 and 4 u1 + v1 = 2.
  for (double v : rec.final_state.u.patch(0)) EXPECT_NEAR(v, 1.0 / 3.0, 1e-5);
  for (double v : rec.final_state.v.patch(1)) EXPECT_NEAR(v, 2.0 / 3.0, 1e-5);
}

TEST(CoexistenceIdentity, RejectsNonSteadyState) {
  const auto g = build_grid(kThree, GridResolution::uniform_count(3, 20));
  const auto u = jump_consistent_constant(g, kRes.p(), 0.2);
  const auto v = jump_consistent_constant(g, kMut.p(), 0.2);
  EXPECT_THROW(coexistence_identity_residual(u, v, kThreeEnv, kRes, kMut, g, 0.1, 0.5), NumericalError);
  EXPECT_THROW(coexistence_identity_residual(u, v, kThreeEnv, kRes, kMut, g, 0.5, 0.1), ValidationError);
}
