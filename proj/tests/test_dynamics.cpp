#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "patchcomp/validation.hpp"

using namespace patchcomp;

namespace {

const Landscape kLand({0.0, 1.0, 2.0});
const PatchEnvironment kEnv{{1, 1}, {1, 2}};

double logistic(double u0, double r, double k, double t) { return k / (1.0 + (k / u0 - 1.0) * std::exp(-r * t)); }

}  // namespace

TEST(Dynamics, SchemeParsing) {
  EXPECT_EQ(parse_scheme("imex-euler"), Scheme::ImexEuler);
  EXPECT_EQ(parse_scheme("cn-diffusion"), Scheme::CrankNicolsonDiffusion);
  EXPECT_THROW(parse_scheme("rk4"), ValidationError);
}

TEST(Dynamics, ResolvedDefaults) {
  const PatchEnvironment env{{0.5, 2.0}, {3.0, 1.5}};
  const auto c = SimConfig{}.resolved(env);
  EXPECT_DOUBLE_EQ(c.dt, 0.005);
  EXPECT_DOUBLE_EQ(c.extinction_eps, 1.5e-6);
  SimConfig bad;
  bad.t_max = 0.0;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Dynamics, SpatiallyFlatLogisticConvergesFirstOrder) {
  // One patch, no mutant: the scheme reduces to explicit Euler for the logistic ODE.
  const Landscape l({0.0, 1.0});
  const PatchEnvironment env{{1.3}, {2.0}};
  const auto g = build_grid(l, GridResolution::uniform_count(1, 8));
  const SpeciesTraits t({1.0}, StrategyVector{});
  const CompetitionSystem sys(g, env, t, t);
  for (Scheme scheme : {Scheme::ImexEuler, Scheme::CrankNicolsonDiffusion}) {
    double prev = 0.0;
    for (double dt : {0.02, 0.01, 0.005}) {
      SystemState s{PiecewiseField(g, 0.1), PiecewiseField(g, 0.0)};
      const auto steps = static_cast<std::size_t>(std::lround(3.0 / dt));
      for (std::size_t k = 0; k < steps; ++k) s = step(s, dt, sys, scheme);
      const double err = std::abs(s.u[0] - logistic(0.1, 1.3, 2.0, 3.0));
      for (double v : s.u.values()) EXPECT_NEAR(v, s.u[0], 1e-12);
      if (prev > 0.0) {
        EXPECT_NEAR(prev / err, 2.0, 0.2);
      }
      prev = err;
    }
  }
}

TEST(Dynamics, SemiTrivialStateIsStationary) {
  const auto g = build_grid(kLand, GridResolution::spacing(0.02));
  const SpeciesTraits res({1, 1}, StrategyVector{{3.0}});
  const SpeciesTraits mut({1, 1}, StrategyVector{{1.5}});
  const CompetitionSystem sys(g, kEnv, res, mut);
  const auto ustar = solve_resident_steady(kLand, kEnv, res, g);
  SystemState s{ustar, PiecewiseField(g, 0.0)};
  StepInfo info;
  for (int k = 0; k < 50; ++k) s = step(s, 0.01, sys, Scheme::ImexEuler, &info);
  for (std::size_t k = 0; k < ustar.values().size(); ++k) EXPECT_NEAR(s.u[k], ustar[k], 1e-10);
  EXPECT_EQ(s.v.max(), 0.0);
  EXPECT_LT(info.rate, 1e-8);
  EXPECT_LT(sys.steady_residual(s), 1e-8);
}

TEST(Dynamics, StepsKeepJumpConditionsAndPositivity) {
  const auto g = build_grid(kLand, GridResolution::spacing(0.05));
  const SpeciesTraits res({1, 0.5}, StrategyVector{{3.0}});
  const SpeciesTraits mut({2, 1}, StrategyVector{{0.7}});
  const CompetitionSystem sys(g, kEnv, res, mut);
  auto s = default_initial_state(sys);
  for (int k = 0; k < 200; ++k) s = step(s, 0.05, sys, Scheme::CrankNicolsonDiffusion);
  EXPECT_TRUE(s.u.jump_consistent(res.p(), 1e-12));
  EXPECT_TRUE(s.v.jump_consistent(mut.p(), 1e-12));
  EXPECT_GE(s.u.min(), 0.0);
  EXPECT_GE(s.v.min(), 0.0);
}

TEST(Dynamics, OrderPreservedForRandomPairs) {
  const auto g = build_grid(kLand, GridResolution::spacing(0.02));
  const SpeciesTraits res({1, 1.5}, StrategyVector{{3.0}});
  const SpeciesTraits mut({0.7, 1.2}, StrategyVector{{1.2}});
  const CompetitionSystem sys(g, kEnv, res, mut);
  std::mt19937_64 rng(99);
  for (int k = 0; k < 5; ++k) {
    const auto [a, b] = random_ordered_pair(sys, rng);
    for (std::size_t j = 0; j < a.u.values().size(); ++j) {
      ASSERT_GE(a.u[j], b.u[j]);
      ASSERT_LE(a.v[j], b.v[j]);
    }
    const auto chk = order_preservation_check(a, b, SimConfig{}, sys, 300);
    EXPECT_TRUE(chk.ordered) << "violation " << chk.max_violation;
  }
}

TEST(Dynamics, BoundingBoxDominatesCapacityAndData) {
  const auto g = build_grid(kLand, GridResolution::spacing(0.05));
  const SpeciesTraits t({1, 1}, StrategyVector{{0.5}});
  const auto w0 = jump_consistent_constant(g, t.p(), 3.0);
  const auto box = bounding_box(w0, kEnv, t);
  EXPECT_TRUE(box.jump_consistent(t.p()));
  for (std::size_t k = 0; k < w0.values().size(); ++k) EXPECT_GE(box[k], w0[k]);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_GE(box.patch(i)[0], kEnv.k[i]);
}

TEST(Dynamics, VerdictsOfFarApartStrategies) {
  const auto g = build_grid(kLand, GridResolution::spacing(0.02));
  struct Case {
    double p, ph;
    std::vector<double> dh;
    Verdict expected;
  };
  for (const auto& c : {Case{3, 5, {2, 2}, Verdict::ResidentWins}, Case{5, 3, {0.5, 0.5}, Verdict::MutantWins},
                        Case{4, 1, {1, 1}, Verdict::Coexistence}}) {
    const CompetitionSystem sys(g, kEnv, SpeciesTraits({1, 1}, StrategyVector{{c.p}}),
                                SpeciesTraits(c.dh, StrategyVector{{c.ph}}));
    const auto rec = simulate_default(sys, SimConfig{});
    EXPECT_EQ(rec.verdict, c.expected) << rec.note;
    EXPECT_TRUE(rec.converged);
    EXPECT_TRUE(rec.box_respected);
    SimConfig half;
    half.dt = 0.005;
    EXPECT_EQ(simulate_default(sys, half).verdict, c.expected);
  }
}

TEST(Dynamics, UnsettledRunIsUndetermined) {
  const auto g = build_grid(kLand, GridResolution::spacing(0.05));
  const CompetitionSystem sys(g, kEnv, SpeciesTraits({1, 1}, StrategyVector{{3}}),
                              SpeciesTraits({2, 2}, StrategyVector{{5}}));
  SimConfig c;
  c.t_max = 1.0;
  const auto rec = simulate_default(sys, c);
  EXPECT_EQ(rec.verdict, Verdict::Undetermined);
  EXPECT_FALSE(rec.converged);
  EXPECT_EQ(rec.note, "t_max reached before the state settled");
}

TEST(Dynamics, NegativeInitialDataRejected) {
  const auto g = build_grid(kLand, GridResolution::spacing(0.05));
  const SpeciesTraits t({1, 1}, StrategyVector{{3}});
  const CompetitionSystem sys(g, kEnv, t, t);
  const auto ustar = solve_resident_steady(kLand, kEnv, t, g);
  SystemState s{PiecewiseField(g, -1.0), PiecewiseField(g, 0.0)};
  EXPECT_THROW(simulate(s, SimConfig{}, sys, ustar, ustar), ValidationError);
}

TEST(Dynamics, TrajectoryCsv) {
  const auto g = build_grid(kLand, GridResolution::uniform_count(2, 4));
  const SpeciesTraits t({1, 1}, StrategyVector{{3}});
  const CompetitionSystem sys(g, kEnv, t, t);
  const auto ustar = solve_resident_steady(kLand, kEnv, t, g);
  SimConfig c;
  c.t_max = 0.1;
  c.dt = 0.01;
  c.snapshot_stride = 5;
  std::ostringstream os;
  (void)simulate(default_initial_state(sys), c, sys, ustar, ustar, &os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,patch,x,u,v");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3 * g->total_dofs());
}
