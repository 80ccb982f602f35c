#include <gtest/gtest.h>

#include <sstream>

#include "patchcomp/invasion.hpp"

using namespace patchcomp;

namespace {

const Landscape kLand({0.0, 1.0, 2.0});
const PatchEnvironment kEnv{{1, 1}, {1, 2}};

StrategySetting setting(double h = 0.02) {
  return {kLand, kEnv, {1.0, 1.0}, build_grid(kLand, GridResolution::spacing(h)), {}};
}

}  // namespace

TEST(Prediction, RegionRows) {
  auto predict = [](double p, double ph, std::vector<double> dh) {
    return predict_outcome(StrategyVector{{p}}, StrategyVector{{ph}}, {1, 1}, dh, kEnv);
  };
  EXPECT_EQ(predict(3, 5, {2, 2}).global_verdict, GlobalVerdict::ResidentWins);
  EXPECT_EQ(predict(3, 5, {2, 2}).invade_when_rare, Invasion::No);
  EXPECT_EQ(predict(5, 3, {1, 1}).global_verdict, GlobalVerdict::MutantWins);
  EXPECT_EQ(predict(4, 1, {3, 3}).global_verdict, GlobalVerdict::Coexistence);
  EXPECT_EQ(predict(0.3, 1.2, {0.5, 0.5}).global_verdict, GlobalVerdict::MutantWins);
  EXPECT_EQ(predict(1.2, 0.3, {1, 1}).global_verdict, GlobalVerdict::ResidentWins);
  EXPECT_EQ(predict(1, 4, {1, 1}).global_verdict, GlobalVerdict::Coexistence);
  // p >> p_hat with p_hat not >> kbar: invades, no global statement.
  const auto l1 = predict_outcome(StrategyVector{{3}}, StrategyVector{{2}}, {1, 1}, {1, 1}, kEnv);
  EXPECT_EQ(l1.region, RegionLabel::L1);
  EXPECT_EQ(l1.invade_when_rare, Invasion::Yes);
  EXPECT_EQ(l1.global_verdict, GlobalVerdict::OutsideTheory);
  EXPECT_EQ(predict(2, 3, {1, 1}).invade_when_rare, Invasion::Neutral);
  // One patch: nothing to predict.
  const auto one = predict_outcome(StrategyVector{}, StrategyVector{}, {1}, {1}, PatchEnvironment{{1}, {1}});
  EXPECT_EQ(one.region, RegionLabel::Unclassified);
}

TEST(Prediction, CsvRecord) {
  std::ostringstream os;
  write_prediction_header(os);
  write_prediction_row(os, predict_outcome(StrategyVector{{3}}, StrategyVector{{5}}, {1, 1}, {2, 2}, kEnv));
  EXPECT_EQ(os.str(), "region,invade,verdict\nL2,No,ResidentWins\n");
}

TEST(Stability, BothSemiTrivialStates) {
  const ModelParams m{kLand, kEnv, SpeciesTraits({1, 1}, StrategyVector{{5}}),
                      SpeciesTraits({0.5, 0.5}, StrategyVector{{3}})};
  const auto t = stability_table(m, build_grid(kLand, GridResolution::spacing(0.02)));
  EXPECT_EQ(t.resident_state, Stability::Unstable);
  EXPECT_EQ(t.mutant_state, Stability::Stable);
  EXPECT_EQ(m.swapped().resident, m.mutant);
}

TEST(Pip, SignsAndDeterminismAcrossWorkers) {
  const auto s = setting();
  const std::vector<double> axis{1.0, 1.5, 3.0};
  const auto a = pip(axis, axis, s.d, kLand, kEnv, s.grid, {}, 1);
  const auto b = pip(axis, axis, s.d, kLand, kEnv, s.grid, {}, 3);
  EXPECT_EQ(a.lambda, b.lambda);
  for (std::size_t i = 0; i < axis.size(); ++i) EXPECT_EQ(a.sign[i][i], Sign::Neutral);
  // Mutants closer to the IFD value 2 invade.
  EXPECT_EQ(a.sign[0][1], Sign::Positive);
  EXPECT_EQ(a.sign[1][0], Sign::Negative);
  EXPECT_EQ(a.sign[2][1], Sign::Positive);
  std::ostringstream os;
  write_pip_sign_csv(os, a);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "resident_p1\\mutant_p1,1,1.5,3");
  EXPECT_THROW(pip({}, axis, s.d, kLand, kEnv, s.grid), ValidationError);
  const Landscape three({0.0, 1.0, 2.0, 3.0});
  EXPECT_THROW(pip(axis, axis, {1, 1, 1}, three, PatchEnvironment{{1, 1, 1}, {1, 2, 4}},
                   build_grid(three, GridResolution::spacing(0.1))),
               ValidationError);
}

TEST(Strategies, Samples) {
  const auto v = strategy_samples(2.0, 1.0, 3);
  ASSERT_EQ(v.size(), 6u);
  EXPECT_DOUBLE_EQ(v.front(), 1.25);
  EXPECT_DOUBLE_EQ(v.back(), 2.75);
  EXPECT_EQ(strategy_samples(0.1, 1.0, 3).size(), 3u);
  EXPECT_THROW(strategy_samples(2.0, 1.0, 2), ValidationError);
}

TEST(Strategies, IfdIsConvergentStableAndNeighbourhoodInvader) {
  const auto s = setting();
  const auto css = css_check(2.0, 1.0, 3, s);
  EXPECT_TRUE(css.passed);
  EXPECT_GT(css.pairs_checked, 10u);
  EXPECT_GT(css.min_margin, 1e-8);
  const auto nis = nis_check(2.0, 1.0, 3, s);
  EXPECT_TRUE(nis.passed);
  EXPECT_EQ(nis.pairs_checked, 6u);
}

TEST(Strategies, NonIfdIsNotEvolutionarilyStable) {
  const auto s = setting();
  const auto ess = ess_check(3.0, 1.0, 3, s);
  EXPECT_FALSE(ess.passed);
  ASSERT_FALSE(ess.violations.empty());
  for (const auto& w : ess.violations) {
    EXPECT_GT(w.mutant, 2.0);
    EXPECT_LT(w.mutant, 3.0);
    EXPECT_GT(w.lambda1, 0.0);
  }
}

TEST(CrossValidation, MatchesAndSkips) {
  const auto g = build_grid(kLand, GridResolution::spacing(0.02));
  const ModelParams m{kLand, kEnv, SpeciesTraits({1, 1}, StrategyVector{{0.3}}),
                      SpeciesTraits({0.5, 0.5}, StrategyVector{{1.2}})};
  EXPECT_EQ(cross_validate(m, g).agreement, Agreement::Match);
  const ModelParams outside{kLand, kEnv, SpeciesTraits({1, 1}, StrategyVector{{3}}),
                            SpeciesTraits({1, 1}, StrategyVector{{2}})};
  const auto cv = cross_validate(outside, g);
  EXPECT_EQ(cv.agreement, Agreement::Skipped);
  EXPECT_FALSE(cv.outcome);
}

TEST(Sweep, OrderedAndWorkerIndependent) {
  const auto g = build_grid(kLand, GridResolution::spacing(0.05));
  const ModelParams base{kLand, kEnv, SpeciesTraits({1, 1}, StrategyVector{{3}}),
                         SpeciesTraits({1, 1}, StrategyVector{{2}})};
  const std::vector<StrategyVector> rp{StrategyVector{{3}}, StrategyVector{{0.5}}};
  const std::vector<StrategyVector> mp{StrategyVector{{1}}, StrategyVector{{4}}, StrategyVector{{2.5}}};
  const auto a = sweep(base, rp, mp, SweepMode::Fitness, g, {}, 1);
  const auto b = sweep(base, rp, mp, SweepMode::Fitness, g, {}, 4);
  ASSERT_EQ(a.size(), 6u);
  std::ostringstream oa, ob;
  write_sweep_csv(oa, a);
  write_sweep_csv(ob, b);
  EXPECT_EQ(oa.str(), ob.str());
  EXPECT_EQ(a[0].mutant_p, mp[0]);
  EXPECT_EQ(a[3].resident_p, rp[1]);
  EXPECT_EQ(a[1].prediction.region, RegionLabel::L2);
  ASSERT_TRUE(a[1].lambda1);
  EXPECT_LT(*a[1].lambda1, 0.0);
  const auto c = sweep(base, rp, mp, SweepMode::Classify, g);
  EXPECT_FALSE(c[0].lambda1);
  EXPECT_EQ(parse_sweep_mode("fitness"), SweepMode::Fitness);
  EXPECT_THROW(parse_sweep_mode("both"), ValidationError);
}

TEST(ParallelFor, PropagatesErrors) {
  std::vector<int> hit(20, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] = 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw NumericalError("boom");
                            }),
               NumericalError);
}
