#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "patchcomp/eigen.hpp"

using namespace patchcomp;

namespace {

Eigen::MatrixXd dense(const Tridiagonal& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    m(j, j) = t.diag[j];
    if (j > 0) m(j, j - 1) = t.lower[j];
    if (j + 1 < n) m(j, j + 1) = t.upper[j];
  }
  return m;
}

// Largest real eigenvalue and its eigenvector from a dense nonsymmetric solve.
std::pair<double, Eigen::VectorXd> dense_principal(const Tridiagonal& t) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(dense(t));
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < es.eigenvalues().size(); ++j)
    if (es.eigenvalues()[j].real() > es.eigenvalues()[best].real()) best = j;
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  v /= v.cwiseAbs().maxCoeff() * (v.sum() > 0 ? 1.0 : -1.0);
  return {es.eigenvalues()[best].real(), v};
}

LinearOperator random_operator(std::mt19937_64& rng, std::size_t per_patch) {
  std::uniform_real_distribution<double> d(0.2, 2.0), p(0.3, 3.0), c(-1.0, 1.0);
  const Landscape l({0.0, 1.0, 1.6, 2.5});
  const auto g = build_grid(l, GridResolution::uniform_count(3, per_patch));
  const SpeciesTraits t({d(rng), d(rng), d(rng)}, StrategyVector{{p(rng), p(rng)}});
  PiecewiseField pot(g);
  const double a = c(rng), b = c(rng);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < g->nodes(i).size(); ++j) pot.patch(i)[j] = a * std::sin(3.0 * g->nodes(i)[j]) + b * i;
  return assemble_linearization(g, t, pot);
}

}  // namespace

TEST(Eigen, ConstantPotentialSinglePatch) {
  const Landscape l({0.0, 1.0});
  const auto g = build_grid(l, GridResolution::uniform_count(1, 100));
  const auto e = principal_eigenpair(assemble_linearization(g, SpeciesTraits({1.0}, StrategyVector{}), PiecewiseField(g, 0.7)));
  EXPECT_NEAR(e.lambda1, 0.7, 1e-12);
  for (double v : e.phi.values()) EXPECT_NEAR(v, 1.0, 1e-12);
  EXPECT_GT(e.gap, 0.0);
}

TEST(Eigen, ZeroPotentialGivesJumpConsistentConstant) {
  const Landscape l({0.0, 1.0, 2.0});
  const auto g = build_grid(l, GridResolution::uniform_count(2, 50));
  const SpeciesTraits t({1.0, 0.5}, StrategyVector{{0.25}});
  const auto e = principal_eigenpair(assemble_diffusion(g, t));
  EXPECT_NEAR(e.lambda1, 0.0, 1e-12);
  EXPECT_TRUE(e.phi.jump_consistent(t.p(), 1e-10));
  EXPECT_NEAR(e.phi.max(), 1.0, 1e-15);
  EXPECT_NEAR(e.phi.min(), 0.25, 1e-10);
}

TEST(Eigen, DenseCrossCheck) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const auto op = random_operator(rng, 20 + 20 * static_cast<std::size_t>(trial % 3));
    const auto e = principal_eigenpair(op);
    const auto [lambda, v] = dense_principal(op.matrix());
    EXPECT_NEAR(e.lambda1, lambda, 1e-10 * std::max(1.0, std::abs(lambda)));
    const auto y = op.reduce(e.phi);
    const double ymax = *std::max_element(y.begin(), y.end());
    for (std::size_t r = 0; r < y.size(); ++r) EXPECT_NEAR(y[r] / ymax, v[static_cast<Eigen::Index>(r)], 1e-8);
    EXPECT_GT(e.phi.min(), 0.0);
    EXPECT_LT(e.residual, 1e-8);
  }
}

TEST(Eigen, GapMatchesDenseSecondEigenvalue) {
  std::mt19937_64 rng(2);
  const auto op = random_operator(rng, 30);
  const auto e = principal_eigenpair(op);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(op.symmetrized().as_tridiagonal()));
  const auto& ev = es.eigenvalues();
  EXPECT_NEAR(e.gap, ev[ev.size() - 1] - ev[ev.size() - 2], 1e-9);
}

TEST(Eigen, GeneralRouteAgreesWithSymmetricRoute) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 3; ++trial) {
    const auto op = random_operator(rng, 25);
    const auto a = principal_eigenpair(op);
    const auto b = principal_eigenpair_general(op, op.matrix());
    EXPECT_NEAR(a.lambda1, b.lambda1, 1e-9);
    for (std::size_t k = 0; k < a.phi.values().size(); ++k) EXPECT_NEAR(a.phi[k], b.phi[k], 1e-7);
  }
}

TEST(Eigen, GeneralRouteRejectsNegativeCoupling) {
  const Landscape l({0.0, 1.0});
  const auto g = build_grid(l, GridResolution::uniform_count(1, 8));
  const auto op = assemble_diffusion(g, SpeciesTraits({1.0}, StrategyVector{}));
  Tridiagonal bad = op.matrix();
  bad.upper[0] = -1.0;
  EXPECT_THROW(principal_eigenpair_general(op, bad), ValidationError);
}

TEST(Eigen, SignClassification) {
  EXPECT_EQ(sign_of(2e-8, 1e-8), Sign::Positive);
  EXPECT_EQ(sign_of(-2e-8, 1e-8), Sign::Negative);
  EXPECT_EQ(sign_of(5e-9, 1e-8), Sign::Neutral);
}

TEST(Fitness, NeutralAtIfdResident) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> p(0.3, 5.0), d(0.2, 3.0);
  const Landscape l({0.0, 1.0, 2.0, 3.0});
  const PatchEnvironment env{{1, 1, 1}, {1, 2, 4}};
  const SpeciesTraits res({1, 1, 1}, StrategyVector{{2.0, 2.0}});
  const auto g = build_grid(l, GridResolution::uniform_count(3, 40));
  for (int k = 0; k < 5; ++k) {
    const SpeciesTraits mut({d(rng), d(rng), d(rng)}, StrategyVector{{p(rng), p(rng)}});
    EXPECT_NEAR(invasion_fitness(l, env, res, mut, g).lambda1, 0.0, 1e-10);
  }
}

TEST(Fitness, IdenticalMutantIsNeutralAndResidentIsStable) {
  const Landscape l({0.0, 1.0, 2.0});
  const PatchEnvironment env{{1, 1}, {1, 2}};
  const SpeciesTraits t({1.0, 0.6}, StrategyVector{{3.5}});
  const auto g = build_grid(l, GridResolution::spacing(0.01));
  const auto f = invasion_fitness_detailed(l, env, t, t, g);
  // u* itself is the principal eigenfunction with eigenvalue 0.
  EXPECT_NEAR(f.eig.lambda1, 0.0, 1e-9);
  const auto own = resident_linearization_eigenpair(f.ustar, env, t);
  EXPECT_LT(own.lambda1, -1e-3);
}

TEST(Fitness, CsvLayout) {
  const Landscape l({0.0, 1.0});
  const auto g = build_grid(l, GridResolution::uniform_count(1, 4));
  const auto e = principal_eigenpair(assemble_linearization(g, SpeciesTraits({1.0}, StrategyVector{}), PiecewiseField(g, 0.5)));
  std::ostringstream os;
  write_eigenpair_csv(os, e);
  const std::string first = os.str().substr(0, os.str().find('\n'));
  ASSERT_EQ(first.substr(0, 8), "lambda1,");
  EXPECT_NEAR(std::stod(first.substr(8)), 0.5, 1e-14);
  EXPECT_NE(os.str().find("patch_index,x,phi\n"), std::string::npos);
}
